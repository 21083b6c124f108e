#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "replidyn/equilibrium.hpp"
#include "replidyn/historic.hpp"
#include "replidyn/replicator.hpp"

namespace replidyn {

// Initial point: explicit coordinates, a face-center reference, or a seeded
// random interior point.
struct InitialSpec {
  enum class Kind { point, face_center, random_interior };
  Kind kind = Kind::point;
  std::vector<double> point;
  std::vector<int> face_indices;  // 1-based
  std::uint64_t seed = 1;

  SimplexPointD resolve(int m) const;
};

struct AveragesOptions {
  int s_max = 3;
};

struct TrappingOptions {
  double delta0 = 0.05;
};

struct HistoricOptions {
  double delta0 = 0.05;
  int s_max = 3;
  double window_fraction = 0.5;
  DivergenceThresholds thresholds;
};

// One experiment: a system, an initial point, an orbit budget, and the
// analyses to run. A config is fully deterministic: identical configs give
// byte-identical CSV outputs.
struct ExperimentConfig {
  ReplicatorSystem system;
  InitialSpec initial;
  long steps = 1000;
  int precision_bits = 0;  // 0: kind default (53 stable, 256 zero-sum)
  int thinning = 1;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";

  bool run_folk = false;
  bool run_historic = false;
  bool run_itinerary = false;
  std::optional<AveragesOptions> averages;
  std::optional<TrappingOptions> trapping;

  FolkOptions folk;
  HistoricOptions historic;

  int resolved_precision() const {
    if (precision_bits != 0) return precision_bits;
    return system.zero_sum() ? 256 : 53;
  }

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json resolved_json() const;  // full provenance copy for the sidecar
};

}  // namespace replidyn
