#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "replidyn/replicator.hpp"

namespace replidyn {

// xi(x) = x1*x2*x3, the decreasing Lyapunov function of the zero-sum maps.
template <class T>
T xi_t(std::span<const T> x) {
  if (x.size() != 3) fail(ErrorKind::dimension, "xi: defined on the 2D simplex only");
  return x[0] * x[1] * x[2];
}
double xi(const SimplexPointD& x);

// One-step multiplicative factor of xi: xi(R_H(x)) = xi(x) * zeta(x).
template <class T>
T zeta_t(const ReplicatorSystem& sys, std::span<const T> x);
double zeta(const ReplicatorSystem& sys, const SimplexPointD& x);

// G-regions of the 2D simplex by coordinate order; ties within tie_tol
// resolve to the lowest qualifying index, so labels are deterministic.
//   G1: x1>=x2>=x3  G2: x1>=x3>=x2  G3: x3>=x1>=x2
//   G4: x3>=x2>=x1  G5: x2>=x3>=x1  G6: x2>=x1>=x3
template <class T>
int region_of_t(std::span<const T> x, double tie_tol) {
  if (x.size() != 3) fail(ErrorKind::dimension, "region_of: defined on the 2D simplex only");
  int c12 = num::sign3_diff(x[0], x[1], tie_tol);
  int c13 = num::sign3_diff(x[0], x[2], tie_tol);
  int c23 = num::sign3_diff(x[1], x[2], tie_tol);
  if (c12 >= 0 && c23 >= 0) return 1;
  if (c12 >= 0 && c13 >= 0 && c23 <= 0) return 2;
  if (c13 <= 0 && c12 >= 0) return 3;
  if (c23 <= 0 && c12 <= 0) return 4;
  if (c23 >= 0 && c13 <= 0) return 5;
  return 6;
}
int region_of(const SimplexPointD& x, double tie_tol);

// U-partition: U0 is the open l1-ball of radius delta0 at the center;
// U1 = (G1 u G2) \ U0, U2 = (G3 u G4) \ U0, U3 = (G5 u G6) \ U0.
struct RegionPartition {
  double u0_radius = 0.05;
};

int u_membership(const SimplexPointD& x, const RegionPartition& part, double tie_tol = 0.0);
int u_label_from(int region, double dist_center, const RegionPartition& part);

// Plain run-length encoding of a 0/1 indicator sequence: alternating
// (ones, zeros) block lengths starting at the first 1.
struct RunLengthEncoding {
  std::vector<long> ones;
  std::vector<long> zeros;
  bool trailing_ones_incomplete = false;
  bool trailing_zeros_incomplete = false;
};
RunLengthEncoding run_length_encode(const std::vector<char>& indicator);

// Per-region trapping record: (p_n, q_n) sojourn/escape blocks of the orbit's
// indicator over one U_i, with finite-prefix gap statistics.
struct TrappingRecord {
  int region = 1;  // 1..3
  std::vector<long> p;  // sojourn lengths (complete blocks only)
  std::vector<long> q;  // escape lengths (complete blocks only)
  bool degenerate = false;          // indicator never alternated
  std::optional<double> lambda_hat; // min over n>=2 of p_{n+1} / sum_{k<=n}(p_k+q_k)
  std::optional<double> mu_hat;     // min over n>=2 of q_{n+1} / (sum + p_{n+1})
  nlohmann::json to_json() const;
};

struct TrappingAnalysis {
  RegionPartition partition;
  long rle_start = -1;          // first completed entry into U1 after leaving U0
  long u0_reentries = 0;        // steps labeled U0 after rle_start (flagged)
  bool order_consistent = true; // blocks follow the kind's cyclic region order
  std::array<TrappingRecord, 3> records;             // per U1, U2, U3
  std::vector<std::array<long, 3>> epochs;           // complete (p, q, r) triples
  std::vector<long> block_labels;                    // raw block sequence (U-index)
  std::vector<long> block_lengths;
  nlohmann::json to_json() const;
};

// Run-length analysis of a zero-sum orbit over the U-partition. Throws an
// insufficient-data error when the orbit alternates but completes fewer than
// three epochs; a never-alternating orbit returns degenerate records instead.
TrappingAnalysis trapping_runs(const Orbit& orbit, const RegionPartition& part);

// Same analysis without the minimum-epoch gate (diagnostic/reporting use).
TrappingAnalysis analyze_trapping(const Orbit& orbit, const RegionPartition& part);

struct GapCertificate {
  bool pass = false;
  std::string reason;  // set when failed
  std::array<std::optional<double>, 3> lambda_hat;
  std::array<std::optional<double>, 3> mu_hat;
  std::optional<double> c_hat;  // min epoch ratio across Step-6 bookkeeping
  long epochs = 0;
  nlohmann::json to_json() const;
};

// (lambda, mu)-gap certificate over per-region records plus the fitted
// three-region constant C-hat.
GapCertificate gap_certificate(const TrappingAnalysis& analysis);

// s-th order repeated time averages, built in one pass with O(s_max * m)
// state. A^(1)_n averages the first n states; A^(s)_n averages A^(s-1)_1..n.
class TimeAverageStack {
 public:
  TimeAverageStack(int m, int s_max, long expected_n, int thinning);

  void push(std::span<const double> state);

  int dim() const { return m_; }
  int s_max() const { return s_max_; }
  long length() const { return n_; }
  // Current A^(s)_n, s in 1..s_max.
  std::span<const double> current(int s) const;
  // Thinned history of A^(s) (one row per thinned n); row i holds n and m values.
  const std::vector<double>& thinned_rows() const { return thinned_; }
  long thinned_count() const { return thinned_n_; }
  int thinning() const { return thinning_; }

  // Exact per-coordinate extrema of A^(s)_n over n >= start (tracked for the
  // window fractions registered before pushing).
  struct WindowExtrema {
    double fraction;
    long start_n;
    std::vector<double> max_v;  // s_max * m
    std::vector<double> min_v;
  };
  const std::vector<WindowExtrema>& windows() const { return windows_; }
  void register_window(double fraction);

 private:
  int m_, s_max_, thinning_;
  long expected_n_, n_ = 0, thinned_n_ = 0;
  std::vector<double> a_;        // s_max * m running averages
  std::vector<double> thinned_;  // (1 + s_max * m) per stored row
  std::vector<WindowExtrema> windows_;
};

// Builds the stack over a recorded orbit trace (thinning follows the orbit).
TimeAverageStack repeated_averages(const Orbit& orbit, int s_max);

struct DivergenceThresholds {
  double theta = 0.1;        // first-order oscillation for "historic"
  double theta_high = 0.02;  // higher-order oscillation floor
  double theta_conv = 1e-6;  // first-order oscillation for "convergent"
};

struct DivergenceReport {
  double window_fraction = 0.5;
  long window_start = 0;
  long n = 0;
  // osc[s-1][i]: max - min of coordinate i of A^(s) over the window.
  std::vector<std::vector<double>> osc;
  std::string verdict;  // "historic" | "convergent" | "indeterminate"
  bool window_exact = true;
  nlohmann::json to_json() const;
};

DivergenceReport divergence_report(const TimeAverageStack& stack, double window_fraction,
                                   const DivergenceThresholds& thr = {});

struct ItineraryViolation {
  long step = 0;
  int from = 0, to = 0;
};

struct ItineraryCertificate {
  bool pass = false;
  long transient_end = -1;  // first step near the boundary (min coord < eps)
  double epsilon = 0.05;
  std::vector<ItineraryViolation> violations;
  long checked_transitions = 0;
  nlohmann::json to_json() const;
};

// Checks that after the transient every G-transition is a self-loop or the
// kind's cyclic successor (REH1: G1->G2->...->G6->G1; REH2 reversed).
ItineraryCertificate itinerary_certificate(const Orbit& orbit, double epsilon = 0.05);

// Cyclic successor of a G-region under the given dynamics kind.
int region_successor(DynamicsKind kind, int region);

// Order in which the orbit visits U-regions (REH1: U1,U2,U3; REH2: U1,U3,U2).
std::array<int, 3> u_visit_order(DynamicsKind kind);

}  // namespace replidyn
