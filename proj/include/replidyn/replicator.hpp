#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "replidyn/fitness.hpp"
#include "replidyn/simplex.hpp"

namespace replidyn {

enum class DynamicsKind { stable, zero_sum_v1, zero_sum_v2 };

const char* to_string(DynamicsKind k);
DynamicsKind dynamics_kind_from_string(const std::string& s);

// Discrete-time replicator system: a fitness map with values in (0,1] plus
// the dynamics kind. The (0,1] range is the standing assumption of both map
// classes and is verified on sampled simplex points at construction.
class ReplicatorSystem {
 public:
  ReplicatorSystem(FitnessMap fitness, DynamicsKind kind);

  const FitnessMap& fitness() const { return fitness_; }
  DynamicsKind kind() const { return kind_; }
  int dim() const { return fitness_.dim(); }
  bool zero_sum() const { return kind_ != DynamicsKind::stable; }

  // Skew-symmetric density-dependent payoff matrix at x (zero-sum kinds only).
  std::array<std::array<double, 3>, 3> payoff_matrix(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static ReplicatorSystem from_json(const nlohmann::json& j);

 private:
  FitnessMap fitness_;
  DynamicsKind kind_;
};

template <class T>
struct StepInfo {
  T pre_sum;        // coordinate sum before renormalization
  double drift = 0; // |pre_sum - 1|
  int clamped = 0;  // components clamped up from tiny negatives
};

// One step of the dynamics at the precision of x; output renormalized to
// unit sum. Components below -2^(-prec/2) raise an invariant error;
// negatives within that tolerance are clamped to zero and counted.
template <class T>
std::vector<T> replicator_step(const ReplicatorSystem& sys, std::span<const T> x,
                               StepInfo<T>* info = nullptr);

SimplexPointD step_stable(const ReplicatorSystem& sys, const SimplexPointD& x,
                          double* drift = nullptr);
SimplexPointD step_zero_sum(const ReplicatorSystem& sys, const SimplexPointD& x,
                            double* drift = nullptr);

struct IterateOptions {
  int thinning = 1;
  bool record_trace = true;
};

// Orbit of the dynamics with per-step diagnostics. Thinned states are stored
// at the native precision; the trace holds per-step double-precision
// snapshots (coordinates below the double exponent range flush to zero) and,
// for m = 3, region labels computed at the native precision.
class Orbit {
 public:
  int m = 0;
  DynamicsKind kind = DynamicsKind::stable;
  int precision_bits = 53;
  long steps = 0;
  int thinning = 1;

  std::vector<long> row_steps;                // step index per stored row
  std::vector<std::vector<double>> rows_d;    // 53-bit runs
  std::vector<std::vector<Real>> rows_mp;     // extended-precision runs

  std::vector<double> drift;                  // per step, pre-renormalization |sum-1|
  double max_drift = 0.0;
  bool drift_flagged = false;                 // some drift exceeded 2^(-prec/2)
  long clamp_events = 0;

  // Per-step trace (present when record_trace).
  std::vector<double> trace_states;           // m doubles per step, steps+1 entries
  std::vector<std::int8_t> region;            // m==3: G-labels 1..6
  std::vector<double> dist_center;            // m==3: l1 distance to the center
  std::vector<double> min_coord;              // m==3
  std::vector<double> log2_xi;                // m==3: log2(x1*x2*x3)
  long xi_increase_steps = 0;                 // zero-sum m==3: xi rose beyond rounding slack

  bool extended() const { return precision_bits > 53; }
  bool has_trace() const { return !trace_states.empty(); }
  long trace_length() const { return has_trace() ? steps + 1 : 0; }
  std::span<const double> trace_state(long n) const {
    return std::span<const double>(trace_states.data() + n * m, static_cast<std::size_t>(m));
  }
  long stored_rows() const { return static_cast<long>(row_steps.size()); }
  std::vector<double> row_as_double(long i) const;
  std::string row_coord_string(long i, int coord) const;  // shortest round-trip / prec digits
};

// Deterministic orbit of n steps from x0. precision_bits must be 53 (hardware
// doubles) or lie in [64, 4096] (software big-floats). Diagnostics are
// computed every step; states are stored every `thinning` steps.
Orbit iterate(const ReplicatorSystem& sys, const SimplexPointD& x0, long n, int precision_bits,
              const IterateOptions& opt = {});

}  // namespace replidyn
