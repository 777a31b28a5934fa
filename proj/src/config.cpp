#include "crpn/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "crpn/error.hpp"

namespace crpn {

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw DataError("config: bad integer value for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw DataError("config: bad integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw DataError("config: bad boolean value for " + key + ": '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ProposalParams RunConfig::proposal_params() const {
  ProposalParams p;
  p.bins = bins;
  p.threshold = threshold;
  p.max_candidates = max_candidates;
  p.suppression_radius = suppression_radius;
  p.nms_iou = nms_iou;
  p.max_proposals = max_proposals;
  p.link.mutual = mutual_link_check;
  p.link.circular = circular_link_distance;
  p.filter_completed_diagonal = filter_completed;
  p.min_corner_prob = min_corner_prob;
  return p;
}

SceneSpec RunConfig::scene_spec() const {
  SceneSpec s;
  s.image_w = image_w;
  s.image_h = image_h;
  s.instances = instances;
  s.size_min = size_min;
  s.size_max = size_max;
  s.aspect_min = aspect_min;
  s.aspect_max = aspect_max;
  s.angle_min = angle_min;
  s.angle_max = angle_max;
  s.min_separation = min_separation;
  s.seed = seed;
  s.stride = stride;
  s.snap_to_grid = snap_to_grid;
  s.vertex_jitter = vertex_jitter;
  s.logit_sigma = noise_sigma;
  s.spurious_corners = spurious;
  return s;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "K") bins = parse_int(key, value);
  else if (key == "M") max_candidates = parse_int(key, value);
  else if (key == "T") threshold = parse_double(key, value);
  else if (key == "suppression_radius") suppression_radius = parse_int(key, value);
  else if (key == "nms_iou") nms_iou = parse_double(key, value);
  else if (key == "max_proposals") max_proposals = parse_int(key, value);
  else if (key == "min_corner_prob") min_corner_prob = parse_double(key, value);
  else if (key == "mutual_link_check") mutual_link_check = parse_bool(key, value);
  else if (key == "circular_link_distance") circular_link_distance = parse_bool(key, value);
  else if (key == "filter_completed") filter_completed = parse_bool(key, value);
  else if (key == "stride") stride = parse_double(key, value);
  else if (key == "grid") grid = parse_int(key, value);
  else if (key == "lambda_seg") lambda_seg = parse_double(key, value);
  else if (key == "lambda_cls") lambda_cls = parse_double(key, value);
  else if (key == "lambda_loc") lambda_loc = parse_double(key, value);
  else if (key == "seg_batch") seg_batch = parse_int(key, value);
  else if (key == "scenes") scenes = parse_int(key, value);
  else if (key == "instances") instances = parse_int(key, value);
  else if (key == "image_w") image_w = parse_int(key, value);
  else if (key == "image_h") image_h = parse_int(key, value);
  else if (key == "size_min") size_min = parse_double(key, value);
  else if (key == "size_max") size_max = parse_double(key, value);
  else if (key == "aspect_min") aspect_min = parse_double(key, value);
  else if (key == "aspect_max") aspect_max = parse_double(key, value);
  else if (key == "angle_min") angle_min = parse_double(key, value);
  else if (key == "angle_max") angle_max = parse_double(key, value);
  else if (key == "min_separation") min_separation = parse_double(key, value);
  else if (key == "sharpness") sharpness = parse_double(key, value);
  else if (key == "noise_sigma") noise_sigma = parse_double(key, value);
  else if (key == "spurious") spurious = parse_int(key, value);
  else if (key == "snap_to_grid") snap_to_grid = parse_bool(key, value);
  else if (key == "vertex_jitter") vertex_jitter = parse_double(key, value);
  else if (key == "seed") seed = parse_u64(key, value);
  else throw DataError("config: unknown key '" + key + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "K=" << bins << "\n";
  out << "M=" << max_candidates << "\n";
  out << "T=" << threshold << "\n";
  out << "suppression_radius=" << suppression_radius << "\n";
  out << "nms_iou=" << nms_iou << "\n";
  out << "max_proposals=" << max_proposals << "\n";
  out << "min_corner_prob=" << min_corner_prob << "\n";
  out << "mutual_link_check=" << (mutual_link_check ? 1 : 0) << "\n";
  out << "circular_link_distance=" << (circular_link_distance ? 1 : 0) << "\n";
  out << "filter_completed=" << (filter_completed ? 1 : 0) << "\n";
  out << "stride=" << stride << "\n";
  out << "grid=" << grid << "\n";
  out << "lambda_seg=" << lambda_seg << "\n";
  out << "lambda_cls=" << lambda_cls << "\n";
  out << "lambda_loc=" << lambda_loc << "\n";
  out << "seg_batch=" << seg_batch << "\n";
  out << "scenes=" << scenes << "\n";
  out << "instances=" << instances << "\n";
  out << "image_w=" << image_w << "\n";
  out << "image_h=" << image_h << "\n";
  out << "size_min=" << size_min << "\n";
  out << "size_max=" << size_max << "\n";
  out << "aspect_min=" << aspect_min << "\n";
  out << "aspect_max=" << aspect_max << "\n";
  out << "angle_min=" << angle_min << "\n";
  out << "angle_max=" << angle_max << "\n";
  out << "min_separation=" << min_separation << "\n";
  out << "sharpness=" << sharpness << "\n";
  out << "noise_sigma=" << noise_sigma << "\n";
  out << "spurious=" << spurious << "\n";
  out << "snap_to_grid=" << (snap_to_grid ? 1 : 0) << "\n";
  out << "vertex_jitter=" << vertex_jitter << "\n";
  out << "seed=" << seed << "\n";
  return out.str();
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw DataError("config: line " + std::to_string(lineno) + " is not key=value");
    }
    cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  RunConfig cfg;
  apply_config_text(cfg, text);
  return cfg;
}

}  // namespace crpn
