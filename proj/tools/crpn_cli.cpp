// Command-line front end for the corner-proposal pipeline.
//
// Subcommands:
//   synth      generate synthetic scenes (ground-truth JSON + corner score maps)
//   propose    corner linking -> quadrilateral proposals -> NMS -> JSON
//   pool       dual rotated-RoI pooling of proposals over a feature tensor
//   eval       precision/recall/F-measure of detections against ground truth
//   gradcheck  analytic-vs-finite-difference audit of the loss gradients
//
// Exit codes: 0 success, 1 usage error, 2 data/format error, 3 internal
// invariant violation (including gradcheck tolerance breaches).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crpn/config.hpp"
#include "crpn/cornermap.hpp"
#include "crpn/error.hpp"
#include "crpn/eval.hpp"
#include "crpn/losses.hpp"
#include "crpn/pooling.hpp"
#include "crpn/proposal.hpp"
#include "crpn/rng.hpp"
#include "crpn/synth.hpp"
#include "crpn/tensor.hpp"

namespace fs = std::filesystem;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> bins;
  std::optional<int> max_candidates;
  std::optional<double> threshold;
  std::optional<double> nms_iou;
  std::optional<int> max_proposals;
  std::optional<int> grid;
  std::optional<int> scenes;
  std::optional<int> instances;
  std::optional<double> noise_sigma;
  std::optional<int> spurious;
};

crpn::RunConfig resolve_config(const CliOptions& opt) {
  crpn::RunConfig cfg;
  if (!opt.config_path.empty()) cfg = crpn::load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.bins) cfg.bins = *opt.bins;
  if (opt.max_candidates) cfg.max_candidates = *opt.max_candidates;
  if (opt.threshold) cfg.threshold = *opt.threshold;
  if (opt.nms_iou) cfg.nms_iou = *opt.nms_iou;
  if (opt.max_proposals) cfg.max_proposals = *opt.max_proposals;
  if (opt.grid) cfg.grid = *opt.grid;
  if (opt.scenes) cfg.scenes = *opt.scenes;
  if (opt.instances) cfg.instances = *opt.instances;
  if (opt.noise_sigma) cfg.noise_sigma = *opt.noise_sigma;
  if (opt.spurious) cfg.spurious = *opt.spurious;
  return cfg;
}

std::string scene_prefix(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw crpn::IoError("cannot write " + path.string());
  out << text;
}

int cmd_synth(const CliOptions& opt) {
  crpn::RunConfig cfg = resolve_config(opt);
  if (opt.out_dir.empty()) throw crpn::DataError("synth: --out directory is required");
  fs::create_directories(opt.out_dir);
  // Echo the effective configuration next to the outputs.
  write_text(fs::path(opt.out_dir) / "config.txt", cfg.to_text());

  for (int s = 0; s < cfg.scenes; ++s) {
    crpn::SceneSpec spec = cfg.scene_spec();
    spec.seed = cfg.seed + static_cast<std::uint64_t>(s);
    const crpn::SceneGenResult scene = crpn::generate_scene(spec);
    if (!scene.complete) {
      std::cerr << "warning: scene " << s << " placed only " << scene.quads.size()
                << " of " << spec.instances << " instances\n";
    }
    std::vector<crpn::QuadProposal> gt;
    gt.reserve(scene.quads.size());
    for (const crpn::Quad& q : scene.quads) gt.push_back({q, 1.0});

    const fs::path prefix = fs::path(opt.out_dir) / scene_prefix(s);
    crpn::save_proposals(gt, prefix.string() + ".gt.json");
    const crpn::CornerScoreMaps maps =
        crpn::scene_to_maps(scene.quads, spec, cfg.bins, cfg.stride, cfg.sharpness);
    crpn::save_corner_maps(maps, prefix);
  }
  return 0;
}

int cmd_propose(const CliOptions& opt, const std::string& maps_prefix,
                const std::string& out_file) {
  crpn::RunConfig cfg = resolve_config(opt);
  if (maps_prefix.empty()) throw crpn::DataError("propose: --maps prefix is required");
  if (out_file.empty()) throw crpn::DataError("propose: --out file is required");

  const crpn::CornerScoreMaps maps = crpn::load_corner_maps(maps_prefix);
  const auto proposals = crpn::generate_proposals(maps, cfg.proposal_params());
  const auto kept = crpn::quad_nms(proposals, cfg.nms_iou,
                                   static_cast<std::size_t>(cfg.max_proposals));
  if (const fs::path parent = fs::path(out_file).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  crpn::save_proposals(kept, out_file);
  return 0;
}

int cmd_pool(const CliOptions& opt, const std::string& features_file,
             const std::string& proposals_file, const std::string& rois_file) {
  crpn::RunConfig cfg = resolve_config(opt);
  if (opt.out_dir.empty()) throw crpn::DataError("pool: --out directory is required");
  if (features_file.empty()) throw crpn::DataError("pool: --features tensor is required");
  if (proposals_file.empty() == rois_file.empty()) {
    throw crpn::DataError("pool: exactly one of --proposals / --rois is required");
  }

  const crpn::Tensor features = crpn::read_tensor(features_file);
  std::vector<crpn::RRoI> rois;
  if (!proposals_file.empty()) {
    for (const auto& p : crpn::load_proposals(proposals_file)) {
      rois.push_back(crpn::rroi_from_quad(p.quad, cfg.stride));
    }
  } else {
    std::ifstream in(rois_file);
    if (!in) throw crpn::IoError("cannot open RoIs: " + rois_file);
    nlohmann::json arr;
    try {
      in >> arr;
    } catch (const nlohmann::json::exception& e) {
      throw crpn::DataError(std::string("RoI JSON parse error: ") + e.what());
    }
    if (!arr.is_array()) throw crpn::DataError("RoI JSON: expected an array");
    for (const auto& j : arr) {
      try {
        rois.push_back({j.at("r").get<double>(), j.at("c").get<double>(),
                        j.at("h").get<double>(), j.at("w").get<double>(),
                        j.at("theta").get<double>()});
      } catch (const nlohmann::json::exception& e) {
        throw crpn::DataError(std::string("RoI JSON: bad five-tuple: ") + e.what());
      }
    }
  }

  fs::create_directories(opt.out_dir);
  for (std::size_t i = 0; i < rois.size(); ++i) {
    const crpn::PooledGrid grid =
        crpn::dual_rroi_pool(features, rois[i], static_cast<std::size_t>(cfg.grid),
                             static_cast<std::size_t>(cfg.grid));
    if (!grid.roi_overlapped) {
      std::cerr << "warning: RoI " << i << " does not overlap the feature map\n";
    }
    char name[32];
    std::snprintf(name, sizeof(name), "pooled_%05zu.crpn", i);
    crpn::write_tensor(grid.values, fs::path(opt.out_dir) / name);
  }
  return 0;
}

int cmd_eval(const std::string& dets_file, const std::string& gts_file,
             double iou_thresh, const std::string& detail_file) {
  if (dets_file.empty() || gts_file.empty()) {
    throw crpn::DataError("eval: --dets and --gts are required");
  }
  const auto dets = crpn::load_proposals(dets_file);
  std::vector<crpn::Quad> gts;
  for (const auto& g : crpn::load_proposals(gts_file)) gts.push_back(g.quad);

  const crpn::EvalReport report = crpn::evaluate(dets, gts, iou_thresh);
  std::cout << "precision,recall,f_measure\n";
  std::cout << report.precision << "," << report.recall << "," << report.f_measure
            << "\n";
  if (!detail_file.empty()) {
    std::ofstream out(detail_file, std::ios::trunc);
    if (!out) throw crpn::IoError("cannot write " + detail_file);
    out << "det,gt,iou\n";
    for (const auto& m : report.matches) {
      out << m.det << "," << m.gt << "," << m.iou << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

double gradcheck_seg(crpn::Rng& rng) {
  constexpr int kBins = 24;
  double worst = 0.0;
  std::array<crpn::SegBatch, 4> batches;
  for (int t = 0; t < 4; ++t) {
    batches[t].type = static_cast<crpn::Corner>(t);
    batches[t].samples.resize(8);
    for (auto& s : batches[t].samples) {
      s.logits.resize(kBins + 1);
      for (double& v : s.logits) v = rng.normal(0.0, 2.0);
      s.label = static_cast<int>(rng.below(kBins + 1));
    }
  }
  const crpn::SegLossResult base = crpn::seg_loss(batches);
  constexpr double kStep = 1e-5;
  for (int t = 0; t < 4; ++t) {
    for (std::size_t m = 0; m < batches[t].samples.size(); ++m) {
      for (std::size_t k = 0; k < batches[t].samples[m].logits.size(); ++k) {
        double& v = batches[t].samples[m].logits[k];
        const double saved = v;
        v = saved + kStep;
        const double up = crpn::seg_loss(batches).loss;
        v = saved - kStep;
        const double down = crpn::seg_loss(batches).loss;
        v = saved;
        const double fd = (up - down) / (2.0 * kStep);
        worst = std::max(worst, rel_err(base.grads[t][m][k], fd));
      }
    }
  }
  return worst;
}

double gradcheck_cls(crpn::Rng& rng) {
  const double p = rng.uniform(0.05, 0.95);
  const int y = rng.below(2) == 0 ? 0 : 1;
  const crpn::ScalarLoss base = crpn::cls_loss(p, y);
  constexpr double kStep = 1e-5;
  const double fd =
      (crpn::cls_loss(p + kStep, y).loss - crpn::cls_loss(p - kStep, y).loss) /
      (2.0 * kStep);
  return rel_err(base.grad, fd);
}

double gradcheck_loc(crpn::Rng& rng) {
  crpn::RegressionTuple t{}, t_star{};
  for (int i = 0; i < 8; ++i) {
    // Keep differences away from the smooth-L1 kink at |x| = 1 so the
    // finite-difference window stays on one branch.
    double d;
    do {
      d = rng.normal(0.0, 1.0);
    } while (std::abs(std::abs(d) - 1.0) < 0.01 || std::abs(d) < 1e-3);
    t_star[i] = rng.normal(0.0, 0.5);
    t[i] = t_star[i] + d;
  }
  const crpn::LocLossResult base = crpn::loc_loss(t, t_star);
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    crpn::RegressionTuple up = t, down = t;
    up[i] += kStep;
    down[i] -= kStep;
    const double fd =
        (crpn::loc_loss(up, t_star).loss - crpn::loc_loss(down, t_star).loss) /
        (2.0 * kStep);
    worst = std::max(worst, rel_err(base.grad[i], fd));
  }
  return worst;
}

int cmd_gradcheck(std::uint64_t seed, int instances, double tolerance) {
  struct Row {
    const char* name;
    double worst = 0.0;
  };
  Row rows[3] = {{"seg_loss"}, {"cls_loss"}, {"loc_loss"}};
  crpn::Rng rng(seed);
  for (int i = 0; i < instances; ++i) rows[0].worst = std::max(rows[0].worst, gradcheck_seg(rng));
  for (int i = 0; i < instances; ++i) rows[1].worst = std::max(rows[1].worst, gradcheck_cls(rng));
  for (int i = 0; i < instances; ++i) rows[2].worst = std::max(rows[2].worst, gradcheck_loc(rng));

  std::cout << "loss_name,max_rel_err,instances\n";
  bool ok = true;
  for (const Row& r : rows) {
    std::cout << r.name << "," << r.worst << "," << instances << "\n";
    ok = ok && r.worst <= tolerance;
  }
  if (!ok) {
    std::cerr << "gradcheck: tolerance " << tolerance << " exceeded\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corner-based quadrilateral proposal pipeline"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string maps_prefix, out_file, features_file, proposals_file, rois_file;
  std::string dets_file, gts_file, detail_file;
  double eval_iou = 0.5;
  int gradcheck_instances = 100;
  double gradcheck_tolerance = 1e-4;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "key=value config file");
    sub->add_option("--seed", opt.seed, "RNG seed");
    sub->add_option("--K", opt.bins, "direction bin count");
    sub->add_option("--M", opt.max_candidates, "top-M candidates per corner role");
    sub->add_option("--T", opt.threshold, "corner probability threshold");
    sub->add_option("--nms-iou", opt.nms_iou, "NMS IoU threshold");
    sub->add_option("--max-proposals", opt.max_proposals, "proposal cap after NMS");
    sub->add_option("--grid", opt.grid, "pooled grid side");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic scenes and maps");
  add_common(synth);
  synth->add_option("--out", opt.out_dir, "output directory")->required();
  synth->add_option("--scenes", opt.scenes, "number of scenes");
  synth->add_option("--instances", opt.instances, "instances per scene");
  synth->add_option("--noise-sigma", opt.noise_sigma, "logit jitter sigma");
  synth->add_option("--spurious", opt.spurious, "spurious corners per scene");

  CLI::App* propose = app.add_subcommand("propose", "generate proposals from maps");
  add_common(propose);
  propose->add_option("--maps", maps_prefix, "corner-map file prefix")->required();
  propose->add_option("--out", out_file, "output proposals JSON")->required();

  CLI::App* pool = app.add_subcommand("pool", "pool proposals over a feature tensor");
  add_common(pool);
  pool->add_option("--features", features_file, "feature tensor (CRPN format)")->required();
  pool->add_option("--proposals", proposals_file, "proposals JSON");
  pool->add_option("--rois", rois_file, "rotated RoIs JSON (five-tuples)");
  pool->add_option("--out", opt.out_dir, "output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "score detections against ground truth");
  eval->add_option("--dets", dets_file, "detections JSON")->required();
  eval->add_option("--gts", gts_file, "ground-truth JSON")->required();
  eval->add_option("--iou", eval_iou, "match IoU threshold");
  eval->add_option("--detail", detail_file, "per-match CSV output");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "audit loss gradients");
  gradcheck->add_option("--seed", opt.seed, "RNG seed");
  gradcheck->add_option("--instances", gradcheck_instances, "instances per loss");
  gradcheck->add_option("--tolerance", gradcheck_tolerance, "max relative error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(opt);
    if (propose->parsed()) return cmd_propose(opt, maps_prefix, out_file);
    if (pool->parsed()) return cmd_pool(opt, features_file, proposals_file, rois_file);
    if (eval->parsed()) return cmd_eval(dets_file, gts_file, eval_iou, detail_file);
    if (gradcheck->parsed()) {
      return cmd_gradcheck(opt.seed.value_or(0), gradcheck_instances,
                           gradcheck_tolerance);
    }
  } catch (const crpn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
