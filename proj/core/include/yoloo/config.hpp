#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "yoloo/kalman.hpp"
#include "yoloo/moteval.hpp"
#include "yoloo/simkit.hpp"
#include "yoloo/tracker.hpp"
#include "yoloo/utcl.hpp"

namespace yoloo {

struct AssocConfig {
  AssociationMode mode = AssociationMode::kUtrFgc;
  double max_cost = kDefaultMaxCost;
  friend bool operator==(const AssocConfig&, const AssocConfig&) = default;
};

struct EncoderConfig {
  int train_points = kTrainPoints;
  int test_points = kTestPoints;
  std::uint64_t init_seed = 0;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct UtclConfig {
  LossConfig loss;
  TrainConfig train;
  friend bool operator==(const UtclConfig&, const UtclConfig&) = default;
};

struct EvalConfig {
  double match_threshold = kDefaultMatchThreshold;
  friend bool operator==(const EvalConfig&, const EvalConfig&) = default;
};

/// Everything a CLI run can configure. JSON sections: kalman, tracker, assoc,
/// lgpenc, utcl, simkit, moteval. Unknown sections or keys are rejected.
struct RunConfig {
  KFConfig kalman;
  TrackerConfig tracker;  // its kalman/association/max_cost fields are ignored
  AssocConfig assoc;
  EncoderConfig lgpenc;
  UtclConfig utcl;
  SimConfig simkit;
  EvalConfig moteval;

  /// Tracker config with the kalman and assoc sections folded in.
  TrackerConfig tracker_config() const;
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

std::string dump_run_config(const RunConfig& cfg);
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Applies "section.key=value"; value is parsed as JSON, falling back to a
/// plain string.
void apply_override(RunConfig& cfg, std::string_view assignment);

}  // namespace yoloo
