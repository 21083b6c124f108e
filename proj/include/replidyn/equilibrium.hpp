#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "replidyn/replicator.hpp"

namespace replidyn {

enum class StabilityVerdict { stable_asymptotic, unstable, undetermined };
const char* to_string(StabilityVerdict v);

struct NashResult {
  bool is_nash = false;
  double residual = 0.0;  // max_k f_k(x) - <x, F(x)>
};

struct EquilibriumReport {
  SimplexPointD point;
  bool is_rest = false;
  double rest_residual = 0.0;  // |R(x) - x|_1
  NashResult nash;
  bool is_strict_nash = false;
  StabilityVerdict stability = StabilityVerdict::undetermined;
  int probes_run = 0;
  nlohmann::json to_json() const;
};

// All 2^m - 1 face centers (the only rest-point candidates of the stable
// class). Guarded to m <= 12 to keep the enumeration sane.
std::vector<SimplexPointD> rest_point_candidates(int m);

// Vertex-reduced Nash test: max_k f_k(x) <= <x,F(x)> + tol, by linearity of
// <y,F(x)> in y.
NashResult is_nash(const ReplicatorSystem& sys, const SimplexPointD& x, double tol);

// Strict Nash: x within tol of a vertex e_k with f_k(e_k) > f_i(e_k) + tol
// for all i != k.
bool is_strict_nash(const ReplicatorSystem& sys, const SimplexPointD& x, double tol);

struct ProbeOptions {
  double radius = 1e-3;
  int probes = 64;
  long horizon = 100000;
  std::uint64_t seed = 1;
  double conv_tol = 1e-8;
  double rest_tol = 1e-9;  // precondition: x must be a rest point
};

// Empirical stability probe around a rest point: perturbed starts within an
// l1-radius; stable_asymptotic when all orbits stay within 3r and converge
// back, unstable when any orbit leaves the 10r shell, else undetermined.
StabilityVerdict probe_stability(const ReplicatorSystem& sys, const SimplexPointD& x,
                                 const ProbeOptions& opt);

// Predicted interior-orbit limit: the center of the face spanned by the
// maximal coordinates of x0.
SimplexPointD predict_limit(const SimplexPointD& x0, double tie_tol = 1e-12);

// M_{alpha,k}(x) = max_{i in alpha} x_i - x_k.
double lyapunov_M(const SimplexPointD& x, const Face& face, int k);

template <class T>
T lyapunov_M_t(std::span<const T> x, const Face& face, int k) {
  if (!face.contains(k)) fail(ErrorKind::parameter, "lyapunov_M: k not in the face");
  T best = x[face.indices.front() - 1];
  for (int i : face.indices)
    if (x[i - 1] > best) best = x[i - 1];
  return best - x[k - 1];
}

struct FolkOptions {
  int trials = 100;
  std::uint64_t seed = 1;
  long horizon = 100000;
  double tol = 1e-8;         // convergence tolerance, |x_n - limit|_1
  double rest_tol = 1e-12;   // clause (i) rest residual bound
  double lyap_slack = 1e-12; // clause (iv) monotonicity slack
  ProbeOptions probe;
  int threads = 0;           // 0: decide from REPLIDYN_THREADS / hardware
};

struct TrialRecord {
  std::vector<double> start;
  std::vector<double> predicted_limit;
  long converged_at = -1;  // first step of the 100-step convergence window
  double final_residual = 0.0;
  bool max_ind_constant = true;
  bool lyapunov_monotone = true;
  bool pass = false;
};

struct ClauseResult {
  bool pass = true;
  std::string witness;  // empty when the clause holds
};

struct FolkCertificate {
  ClauseResult nash_are_rest;          // (i)
  ClauseResult stable_are_nash;        // (ii)
  ClauseResult strict_nash_stable;     // (iii)
  ClauseResult interior_convergence;   // (iv)
  std::vector<EquilibriumReport> candidates;
  std::vector<TrialRecord> trials;
  bool pass() const {
    return nash_are_rest.pass && stable_are_nash.pass && strict_nash_stable.pass &&
           interior_convergence.pass;
  }
  nlohmann::json to_json() const;
};

// Empirical certificate of the four folk-theorem clauses on a stable-kind
// system (m <= 8).
FolkCertificate certify_folk_theorem(const ReplicatorSystem& sys, const FolkOptions& opt);

int worker_thread_count(int requested);  // honors REPLIDYN_THREADS

}  // namespace replidyn
