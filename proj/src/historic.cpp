#include "replidyn/historic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace replidyn {

double xi(const SimplexPointD& x) { return xi_t(x.span()); }

template <class T>
T zeta_t(const ReplicatorSystem& sys, std::span<const T> x) {
  if (!sys.zero_sum()) fail(ErrorKind::unsupported, "zeta: defined for the zero-sum kinds");
  if (x.size() != 3) fail(ErrorKind::dimension, "zeta: defined on the 2D simplex");
  std::vector<T> f;
  sys.fitness().evaluate_into(x, f);
  T one = num::make_like(1.0, x[0]);
  if (sys.kind() == DynamicsKind::zero_sum_v1) {
    return (one + (x[1] * f[0] - x[2] * f[2])) * (one + (x[2] * f[1] - x[0] * f[0])) *
           (one + (x[0] * f[2] - x[1] * f[1]));
  }
  return (one + (x[2] * f[0] - x[1] * f[1])) * (one + (x[0] * f[1] - x[2] * f[2])) *
         (one + (x[1] * f[2] - x[0] * f[0]));
}

template double zeta_t<double>(const ReplicatorSystem&, std::span<const double>);
template Real zeta_t<Real>(const ReplicatorSystem&, std::span<const Real>);

double zeta(const ReplicatorSystem& sys, const SimplexPointD& x) { return zeta_t(sys, x.span()); }

int region_of(const SimplexPointD& x, double tie_tol) { return region_of_t(x.span(), tie_tol); }

int u_label_from(int region, double dist_center, const RegionPartition& part) {
  if (dist_center < part.u0_radius) return 0;
  return (region + 1) / 2;
}

int u_membership(const SimplexPointD& x, const RegionPartition& part, double tie_tol) {
  double dist = 0.0;
  for (double v : x.coords()) dist += std::abs(v - 1.0 / 3.0);
  return u_label_from(region_of(x, tie_tol), dist, part);
}

int region_successor(DynamicsKind kind, int region) {
  if (kind == DynamicsKind::zero_sum_v1) return region % 6 + 1;
  if (kind == DynamicsKind::zero_sum_v2) return (region + 4) % 6 + 1;
  fail(ErrorKind::unsupported, "region_successor: zero-sum kinds only");
}

std::array<int, 3> u_visit_order(DynamicsKind kind) {
  if (kind == DynamicsKind::zero_sum_v2) return {1, 3, 2};
  return {1, 2, 3};
}

RunLengthEncoding run_length_encode(const std::vector<char>& ind) {
  RunLengthEncoding rle;
  std::size_t i = 0;
  while (i < ind.size() && !ind[i]) ++i;
  while (i < ind.size()) {
    long ones = 0, zeros = 0;
    while (i < ind.size() && ind[i]) {
      ++ones;
      ++i;
    }
    if (i == ind.size()) {
      rle.ones.push_back(ones);
      rle.trailing_ones_incomplete = true;
      break;
    }
    rle.ones.push_back(ones);
    while (i < ind.size() && !ind[i]) {
      ++zeros;
      ++i;
    }
    if (i == ind.size()) {
      rle.zeros.push_back(zeros);
      rle.trailing_zeros_incomplete = true;
      break;
    }
    rle.zeros.push_back(zeros);
  }
  return rle;
}

nlohmann::json TrappingRecord::to_json() const {
  nlohmann::json j{{"region", region}, {"p", p}, {"q", q}, {"degenerate", degenerate}};
  if (lambda_hat) j["lambda_hat"] = *lambda_hat;
  if (mu_hat) j["mu_hat"] = *mu_hat;
  return j;
}

nlohmann::json TrappingAnalysis::to_json() const {
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : epochs) eps.push_back({e[0], e[1], e[2]});
  return {{"delta0", partition.u0_radius},
          {"rle_start", rle_start},
          {"u0_reentries", u0_reentries},
          {"order_consistent", order_consistent},
          {"epochs", eps},
          {"u1", records[0].to_json()},
          {"u2", records[1].to_json()},
          {"u3", records[2].to_json()}};
}

namespace {

// Finite-prefix gap statistics over complete (p, q) pairs: minima over
// observed epochs n >= 2 of the displayed liminf ratios.
void fill_gap_stats(TrappingRecord& rec) {
  const std::size_t np = rec.p.size(), nq = rec.q.size();
  // lambda ratios: p_{n+1} / sum_{k<=n}(p_k + q_k), n >= 2
  for (std::size_t n = 2; n + 1 <= np && n <= nq; ++n) {
    long s = 0;
    for (std::size_t k = 0; k < n; ++k) s += rec.p[k] + rec.q[k];
    double ratio = static_cast<double>(rec.p[n]) / s;
    rec.lambda_hat = rec.lambda_hat ? std::min(*rec.lambda_hat, ratio) : ratio;
  }
  // mu ratios: q_{n+1} / (sum_{k<=n}(p_k + q_k) + p_{n+1}), n >= 2
  for (std::size_t n = 2; n + 1 <= nq && n + 1 <= np; ++n) {
    long s = 0;
    for (std::size_t k = 0; k < n; ++k) s += rec.p[k] + rec.q[k];
    s += rec.p[n];
    double ratio = static_cast<double>(rec.q[n]) / s;
    rec.mu_hat = rec.mu_hat ? std::min(*rec.mu_hat, ratio) : ratio;
  }
}

struct UTrace {
  std::vector<char> labels;  // 0..3 per step
  long rle_start = -1;
  long u0_reentries = 0;
};

UTrace u_trace(const Orbit& orbit, const RegionPartition& part) {
  UTrace t;
  const long len = orbit.trace_length();
  t.labels.resize(len);
  for (long n = 0; n < len; ++n)
    t.labels[n] =
        static_cast<char>(u_label_from(orbit.region[n], orbit.dist_center[n], part));
  long exit = 0;
  while (exit < len && t.labels[exit] == 0) ++exit;
  for (long n = exit; n < len; ++n) {
    if (t.labels[n] == 1 && (n == 0 || t.labels[n - 1] != 1)) {
      t.rle_start = n;
      break;
    }
  }
  if (t.rle_start >= 0)
    for (long n = t.rle_start; n < len; ++n)
      if (t.labels[n] == 0) ++t.u0_reentries;
  return t;
}

}  // namespace

TrappingAnalysis analyze_trapping(const Orbit& orbit, const RegionPartition& part) {
  if (!orbit.has_trace()) fail(ErrorKind::precondition, "trapping: orbit has no recorded trace");
  if (orbit.m != 3) fail(ErrorKind::dimension, "trapping: defined on the 2D simplex");

  TrappingAnalysis out;
  out.partition = part;
  UTrace tr = u_trace(orbit, part);
  out.rle_start = tr.rle_start;
  out.u0_reentries = tr.u0_reentries;
  for (int r = 0; r < 3; ++r) out.records[r].region = r + 1;

  const long len = orbit.trace_length();
  long start = tr.rle_start >= 0 ? tr.rle_start : 0;

  // Raw block sequence after the transient cut.
  for (long n = start; n < len; ++n) {
    char lab = tr.labels[n];
    if (out.block_labels.empty() || out.block_labels.back() != lab) {
      out.block_labels.push_back(lab);
      out.block_lengths.push_back(1);
    } else {
      ++out.block_lengths.back();
    }
  }

  // Per-region run-length encodings (complete blocks only).
  for (int r = 1; r <= 3; ++r) {
    std::vector<char> ind;
    ind.reserve(len - start);
    for (long n = start; n < len; ++n) ind.push_back(tr.labels[n] == r ? 1 : 0);
    RunLengthEncoding rle = run_length_encode(ind);
    TrappingRecord& rec = out.records[r - 1];
    rec.p = rle.ones;
    rec.q = rle.zeros;
    if (rle.trailing_ones_incomplete && !rec.p.empty()) rec.p.pop_back();
    if (rle.trailing_zeros_incomplete && !rec.q.empty()) rec.q.pop_back();
    rec.degenerate = (rec.p.size() + rec.q.size() == 0) ||
                     (rle.ones.size() <= 1 && rle.zeros.empty()) || ind.empty();
    fill_gap_stats(rec);
  }

  // Epoch triples in the kind's visiting order, from the raw block sequence.
  const std::array<int, 3> order = u_visit_order(orbit.kind);
  std::size_t b = 0;
  while (b + 2 < out.block_labels.size()) {
    if (out.block_labels[b] != order[0] || out.block_labels[b + 1] != order[1] ||
        out.block_labels[b + 2] != order[2]) {
      out.order_consistent = false;
      break;
    }
    // the third block is complete because a following block exists
    if (b + 3 >= out.block_labels.size()) break;
    out.epochs.push_back({out.block_lengths[b], out.block_lengths[b + 1],
                          out.block_lengths[b + 2]});
    b += 3;
  }
  return out;
}

TrappingAnalysis trapping_runs(const Orbit& orbit, const RegionPartition& part) {
  TrappingAnalysis out = analyze_trapping(orbit, part);
  bool alternated = out.block_labels.size() >= 2;
  if (alternated && out.epochs.size() < 3)
    fail(ErrorKind::insufficient,
         "trapping_runs: only " + std::to_string(out.epochs.size()) +
             " complete epochs (need 3); raise steps or precision");
  return out;
}

nlohmann::json GapCertificate::to_json() const {
  nlohmann::json j{{"pass", pass}, {"reason", reason}, {"epochs", epochs}};
  for (int i = 0; i < 3; ++i) {
    std::string key = "u" + std::to_string(i + 1);
    j[key + "_lambda_hat"] = lambda_hat[i] ? nlohmann::json(*lambda_hat[i]) : nlohmann::json();
    j[key + "_mu_hat"] = mu_hat[i] ? nlohmann::json(*mu_hat[i]) : nlohmann::json();
  }
  j["c_hat"] = c_hat ? nlohmann::json(*c_hat) : nlohmann::json();
  return j;
}

GapCertificate gap_certificate(const TrappingAnalysis& analysis) {
  GapCertificate cert;
  cert.epochs = static_cast<long>(analysis.epochs.size());
  for (int i = 0; i < 3; ++i) {
    cert.lambda_hat[i] = analysis.records[i].lambda_hat;
    cert.mu_hat[i] = analysis.records[i].mu_hat;
  }
  for (int i = 0; i < 3; ++i) {
    if (analysis.records[i].degenerate) {
      cert.reason = "degenerate record for U" + std::to_string(i + 1) +
                    ": trapping block never closed";
      return cert;
    }
  }
  if (!analysis.order_consistent) {
    cert.reason = "block sequence deviates from the cyclic region order";
    return cert;
  }
  if (analysis.epochs.size() < 3) {
    cert.reason = "fewer than 3 complete epochs";
    return cert;
  }
  // Fitted constant over the Step-6 three-region bookkeeping.
  double chat = std::numeric_limits<double>::infinity();
  long s = analysis.epochs[0][0] + analysis.epochs[0][1] + analysis.epochs[0][2];
  for (std::size_t n = 1; n < analysis.epochs.size(); ++n) {
    const auto& e = analysis.epochs[n];
    chat = std::min(chat, static_cast<double>(e[0]) / s);
    chat = std::min(chat, static_cast<double>(e[1]) / (s + e[0]));
    chat = std::min(chat, static_cast<double>(e[2]) / (s + e[0] + e[1]));
    s += e[0] + e[1] + e[2];
  }
  cert.c_hat = chat;
  bool gaps_positive = true;
  for (int i = 0; i < 3; ++i) {
    gaps_positive = gaps_positive && cert.lambda_hat[i] && *cert.lambda_hat[i] > 0.0;
    gaps_positive = gaps_positive && cert.mu_hat[i] && *cert.mu_hat[i] > 0.0;
  }
  if (!gaps_positive) {
    cert.reason = "gap statistics missing or nonpositive";
    return cert;
  }
  if (!(chat > 0.0)) {
    cert.reason = "fitted C is nonpositive";
    return cert;
  }
  cert.pass = true;
  return cert;
}

TimeAverageStack::TimeAverageStack(int m, int s_max, long expected_n, int thinning)
    : m_(m), s_max_(s_max), thinning_(std::max(1, thinning)), expected_n_(expected_n) {
  if (s_max_ < 1) fail(ErrorKind::parameter, "TimeAverageStack: s_max must be >= 1");
  a_.assign(static_cast<std::size_t>(s_max_) * m_, 0.0);
}

void TimeAverageStack::register_window(double fraction) {
  if (n_ > 0) fail(ErrorKind::precondition, "register_window: must precede pushes");
  if (!(fraction > 0.0 && fraction < 1.0))
    fail(ErrorKind::parameter, "window fraction must lie in (0,1)");
  WindowExtrema w;
  w.fraction = fraction;
  w.start_n = std::max<long>(1, static_cast<long>(std::ceil((1.0 - fraction) * expected_n_)));
  w.max_v.assign(a_.size(), -std::numeric_limits<double>::infinity());
  w.min_v.assign(a_.size(), std::numeric_limits<double>::infinity());
  windows_.push_back(std::move(w));
}

void TimeAverageStack::push(std::span<const double> state) {
  ++n_;
  // A^(1)_n = A^(1)_{n-1} + (x_{n-1} - A^(1)_{n-1})/n ; higher orders average
  // the previous order's current value with the same rule.
  for (int i = 0; i < m_; ++i) a_[i] += (state[i] - a_[i]) / n_;
  for (int s = 1; s < s_max_; ++s) {
    double* cur = a_.data() + static_cast<std::size_t>(s) * m_;
    const double* below = a_.data() + static_cast<std::size_t>(s - 1) * m_;
    for (int i = 0; i < m_; ++i) cur[i] += (below[i] - cur[i]) / n_;
  }
  for (auto& w : windows_) {
    if (n_ >= w.start_n) {
      for (std::size_t i = 0; i < a_.size(); ++i) {
        w.max_v[i] = std::max(w.max_v[i], a_[i]);
        w.min_v[i] = std::min(w.min_v[i], a_[i]);
      }
    }
  }
  if ((n_ - 1) % thinning_ == 0 || n_ == expected_n_) {
    thinned_.push_back(static_cast<double>(n_));
    thinned_.insert(thinned_.end(), a_.begin(), a_.end());
    ++thinned_n_;
  }
}

std::span<const double> TimeAverageStack::current(int s) const {
  if (s < 1 || s > s_max_) fail(ErrorKind::parameter, "TimeAverageStack: s out of range");
  return std::span<const double>(a_.data() + static_cast<std::size_t>(s - 1) * m_, m_);
}

TimeAverageStack repeated_averages(const Orbit& orbit, int s_max) {
  if (!orbit.has_trace())
    fail(ErrorKind::precondition, "repeated_averages: orbit has no recorded trace");
  TimeAverageStack stack(orbit.m, s_max, orbit.trace_length(), orbit.thinning);
  stack.register_window(0.25);
  stack.register_window(0.5);
  stack.register_window(0.75);
  for (long n = 0; n < orbit.trace_length(); ++n) stack.push(orbit.trace_state(n));
  return stack;
}

nlohmann::json DivergenceReport::to_json() const {
  return {{"window_fraction", window_fraction}, {"window_start", window_start},
          {"n", n},                             {"osc", osc},
          {"verdict", verdict},                 {"window_exact", window_exact}};
}

DivergenceReport divergence_report(const TimeAverageStack& stack, double window_fraction,
                                   const DivergenceThresholds& thr) {
  if (stack.length() < 1000)
    fail(ErrorKind::precondition, "divergence_report: need a stack of length >= 1e3");
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    fail(ErrorKind::parameter, "divergence_report: window_fraction must lie in (0,1)");

  DivergenceReport rep;
  rep.window_fraction = window_fraction;
  rep.n = stack.length();
  const int m = stack.dim(), smax = stack.s_max();
  rep.osc.assign(smax, std::vector<double>(m, 0.0));

  const TimeAverageStack::WindowExtrema* exact = nullptr;
  for (const auto& w : stack.windows())
    if (std::abs(w.fraction - window_fraction) < 1e-12) exact = &w;

  if (exact) {
    rep.window_start = exact->start_n;
    for (int s = 0; s < smax; ++s)
      for (int i = 0; i < m; ++i) {
        std::size_t idx = static_cast<std::size_t>(s) * m + i;
        rep.osc[s][i] = exact->max_v[idx] - exact->min_v[idx];
      }
  } else {
    // fall back to the thinned series (slightly underestimates oscillation)
    rep.window_exact = false;
    rep.window_start =
        std::max<long>(1, static_cast<long>(std::ceil((1.0 - window_fraction) * stack.length())));
    const std::vector<double>& rows = stack.thinned_rows();
    const std::size_t stride = 1 + static_cast<std::size_t>(smax) * m;
    std::vector<double> hi(static_cast<std::size_t>(smax) * m,
                           -std::numeric_limits<double>::infinity());
    std::vector<double> lo(static_cast<std::size_t>(smax) * m,
                           std::numeric_limits<double>::infinity());
    for (long r = 0; r < stack.thinned_count(); ++r) {
      const double* row = rows.data() + r * stride;
      if (static_cast<long>(row[0]) < rep.window_start) continue;
      for (std::size_t i = 0; i < hi.size(); ++i) {
        hi[i] = std::max(hi[i], row[1 + i]);
        lo[i] = std::min(lo[i], row[1 + i]);
      }
    }
    for (int s = 0; s < smax; ++s)
      for (int i = 0; i < m; ++i) {
        std::size_t idx = static_cast<std::size_t>(s) * m + i;
        rep.osc[s][i] = hi[idx] > lo[idx] ? hi[idx] - lo[idx] : 0.0;
      }
  }

  bool conv = true, hist = true;
  for (int i = 0; i < m; ++i) {
    conv = conv && rep.osc[0][i] <= thr.theta_conv;
    hist = hist && rep.osc[0][i] >= thr.theta;
  }
  for (int s = 1; s < smax && hist; ++s)
    for (int i = 0; i < m; ++i) hist = hist && rep.osc[s][i] >= thr.theta_high;
  rep.verdict = hist ? "historic" : (conv ? "convergent" : "indeterminate");
  return rep;
}

nlohmann::json ItineraryCertificate::to_json() const {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& viol : violations)
    v.push_back({{"step", viol.step}, {"from", viol.from}, {"to", viol.to}});
  return {{"pass", pass},
          {"transient_end", transient_end},
          {"epsilon", epsilon},
          {"checked_transitions", checked_transitions},
          {"violations", v}};
}

ItineraryCertificate itinerary_certificate(const Orbit& orbit, double epsilon) {
  if (!orbit.has_trace())
    fail(ErrorKind::precondition, "itinerary_certificate: orbit has no recorded trace");
  if (orbit.kind == DynamicsKind::stable)
    fail(ErrorKind::unsupported, "itinerary_certificate: zero-sum orbits only");
  if (orbit.steps < 1000)
    fail(ErrorKind::precondition, "itinerary_certificate: need an orbit of length >= 1e3");

  ItineraryCertificate cert;
  cert.epsilon = epsilon;
  const long len = orbit.trace_length();
  for (long n = 0; n < len; ++n) {
    if (orbit.min_coord[n] < epsilon) {
      cert.transient_end = n;
      break;
    }
  }
  if (cert.transient_end < 0) {
    cert.pass = false;
    return cert;  // orbit never reached the boundary strip; nothing to certify
  }
  for (long n = cert.transient_end; n + 1 < len; ++n) {
    int a = orbit.region[n], b = orbit.region[n + 1];
    ++cert.checked_transitions;
    if (b != a && b != region_successor(orbit.kind, a)) {
      if (cert.violations.size() < 100) cert.violations.push_back({n, a, b});
    }
  }
  cert.pass = cert.violations.empty();
  return cert;
}

}  // namespace replidyn
