#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "crpn/proposal.hpp"
#include "crpn/synth.hpp"

namespace crpn {

/// Run configuration shared by the CLI subcommands. Parsed from a plain
/// key=value text file; command-line flags override file values. Defaults
/// follow the reference operating point: K=24, M=32, T=0.5, 200 proposals,
/// all loss weights 1.
struct RunConfig {
  // Proposal pipeline.
  int bins = 24;                // K
  int max_candidates = 32;      // M
  double threshold = 0.5;       // T
  int suppression_radius = 2;
  double nms_iou = 0.7;
  int max_proposals = 200;
  double min_corner_prob = -1.0;  // <0: follow threshold
  bool mutual_link_check = true;
  bool circular_link_distance = true;
  bool filter_completed = true;

  // Geometry / pooling.
  double stride = 8.0;
  int grid = 7;  // pooled grid side

  // Loss weights.
  double lambda_seg = 1.0;
  double lambda_cls = 1.0;
  double lambda_loc = 1.0;
  int seg_batch = 32;

  // Synthetic scenes.
  int scenes = 1;
  int instances = 5;
  int image_w = 512;
  int image_h = 512;
  double size_min = 40.0;
  double size_max = 72.0;
  double aspect_min = 1.5;
  double aspect_max = 3.0;
  double angle_min = -45.0;
  double angle_max = 45.0;
  double min_separation = 120.0;
  double sharpness = 10.0;
  double noise_sigma = 0.0;
  int spurious = 0;
  bool snap_to_grid = true;
  double vertex_jitter = 0.0;

  std::uint64_t seed = 0;

  ProposalParams proposal_params() const;
  SceneSpec scene_spec() const;

  /// Applies one key=value assignment. Throws DataError on unknown keys or
  /// unparsable values.
  void set(const std::string& key, const std::string& value);

  /// Canonical key=value rendering (one per line, fixed key order) so runs
  /// can echo their configuration byte-reproducibly.
  std::string to_text() const;
};

/// Parses a key=value file ('#' comments and blank lines allowed).
RunConfig load_config(const std::filesystem::path& path);
void apply_config_text(RunConfig& cfg, const std::string& text);

}  // namespace crpn
