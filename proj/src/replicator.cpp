#include "replidyn/replicator.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <type_traits>

#include "replidyn/historic.hpp"
#include "replidyn/rng.hpp"

namespace replidyn {

const char* to_string(DynamicsKind k) {
  switch (k) {
    case DynamicsKind::stable: return "stable";
    case DynamicsKind::zero_sum_v1: return "zero_sum_v1";
    case DynamicsKind::zero_sum_v2: return "zero_sum_v2";
  }
  return "?";
}

DynamicsKind dynamics_kind_from_string(const std::string& s) {
  if (s == "stable") return DynamicsKind::stable;
  if (s == "zero_sum_v1") return DynamicsKind::zero_sum_v1;
  if (s == "zero_sum_v2") return DynamicsKind::zero_sum_v2;
  fail(ErrorKind::config, "unknown dynamics kind '" + s + "'");
}

ReplicatorSystem::ReplicatorSystem(FitnessMap fitness, DynamicsKind kind)
    : fitness_(std::move(fitness)), kind_(kind) {
  Real::ensure_wide_exponent_range();
  if (zero_sum() && fitness_.dim() != 3)
    fail(ErrorKind::dimension, "zero-sum replicator equations are defined on the 2D simplex (m=3)");
  // Standing assumption 0 < F(x) <= 1, verified on sampled simplex points.
  SampleRng rng(0xF17BEE5ull);
  std::vector<double> f;
  for (int i = 0; i < 256; ++i) {
    std::vector<double> x = rng.simplex_point(fitness_.dim());
    fitness_.evaluate_into(std::span<const double>(x), f);
    for (double v : f) {
      if (!(v > 0.0))
        fail(ErrorKind::domain,
             "fitness range violates (0,1]: nonpositive component " + std::to_string(v) +
                 " at a sampled point; wrap the map with normalize()");
      if (v > 1.0 + 1e-9)
        fail(ErrorKind::domain, "fitness range violates (0,1]: component " + std::to_string(v) +
                                    " at a sampled point; wrap the map with normalize()");
    }
  }
}

std::array<std::array<double, 3>, 3> ReplicatorSystem::payoff_matrix(
    std::span<const double> x) const {
  if (!zero_sum())
    fail(ErrorKind::unsupported, "payoff_matrix: defined for the zero-sum kinds only");
  std::vector<double> f = fitness_.evaluate(x);
  if (kind_ == DynamicsKind::zero_sum_v1) {
    return {{{0.0, f[0], -f[2]}, {-f[0], 0.0, f[1]}, {f[2], -f[1], 0.0}}};
  }
  return {{{0.0, -f[1], f[0]}, {f[1], 0.0, -f[2]}, {-f[0], f[2], 0.0}}};
}

nlohmann::json ReplicatorSystem::to_json() const {
  return {{"kind", to_string(kind_)}, {"fitness", fitness_.to_json()}};
}

ReplicatorSystem ReplicatorSystem::from_json(const nlohmann::json& j) {
  FitnessMap f = FitnessMap::from_json(j.at("fitness"));
  return ReplicatorSystem(std::move(f), dynamics_kind_from_string(j.at("kind").get<std::string>()));
}

namespace {

int precision_of(std::span<const double>) { return 53; }
int precision_of(std::span<const Real> x) { return x[0].prec(); }

template <class T>
void clamp_negatives(std::vector<T>& y, double neg_tol, int* clamped) {
  T zero = num::make_like(0.0, y[0]);
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k] < zero) {
      T bound = num::make_like(-neg_tol, y[0]);
      if (y[k] < bound)
        fail(ErrorKind::invariant, "negative component " + std::to_string(num::to_double(y[k])) +
                                       " at index " + std::to_string(k + 1) +
                                       " (fitness violates the range constraint)");
      y[k] = zero;
      ++(*clamped);
    }
  }
}

}  // namespace

template <class T>
std::vector<T> replicator_step(const ReplicatorSystem& sys, std::span<const T> x,
                               StepInfo<T>* info) {
  const int m = sys.dim();
  if (static_cast<int>(x.size()) != m) fail(ErrorKind::dimension, "step: wrong point dimension");
  const int prec = precision_of(x);
  const double neg_tol = std::ldexp(1.0, -prec / 2);

  std::vector<T> f;
  sys.fitness().evaluate_into(x, f);
  std::vector<T> y(m, num::make_like(0.0, x[0]));
  int clamped = 0;

  if (sys.kind() == DynamicsKind::stable) {
    T avg = num::make_like(0.0, x[0]);
    for (int i = 0; i < m; ++i) avg += x[i] * f[i];
    T one = num::make_like(1.0, x[0]);
    for (int k = 0; k < m; ++k) y[k] = x[k] * (one + (f[k] - avg));
  } else {
    // REH1: x1(1 + x2 f1 - x3 f3), x2(1 + x3 f2 - x1 f1), x3(1 + x1 f3 - x2 f2)
    // REH2: x1(1 + x3 f1 - x2 f2), x2(1 + x1 f2 - x3 f3), x3(1 + x2 f3 - x1 f1)
    T one = num::make_like(1.0, x[0]);
    if (sys.kind() == DynamicsKind::zero_sum_v1) {
      y[0] = x[0] * (one + (x[1] * f[0] - x[2] * f[2]));
      y[1] = x[1] * (one + (x[2] * f[1] - x[0] * f[0]));
      y[2] = x[2] * (one + (x[0] * f[2] - x[1] * f[1]));
    } else {
      y[0] = x[0] * (one + (x[2] * f[0] - x[1] * f[1]));
      y[1] = x[1] * (one + (x[0] * f[1] - x[2] * f[2]));
      y[2] = x[2] * (one + (x[1] * f[2] - x[0] * f[0]));
    }
  }

  clamp_negatives(y, neg_tol, &clamped);

  T pre_sum = num::sum(std::span<const T>(y));
  T one = num::make_like(1.0, x[0]);
  T drift = pre_sum - one;
  if (drift < num::make_like(0.0, x[0])) drift = -drift;
  for (T& v : y) v /= pre_sum;

  if (info) {
    info->pre_sum = pre_sum;
    info->drift = num::to_double(drift);
    info->clamped = clamped;
  }
  return y;
}

template std::vector<double> replicator_step<double>(const ReplicatorSystem&,
                                                     std::span<const double>, StepInfo<double>*);
template std::vector<Real> replicator_step<Real>(const ReplicatorSystem&, std::span<const Real>,
                                                 StepInfo<Real>*);

SimplexPointD step_stable(const ReplicatorSystem& sys, const SimplexPointD& x, double* drift) {
  if (sys.kind() != DynamicsKind::stable)
    fail(ErrorKind::unsupported, "step_stable: system is not of the stable kind");
  StepInfo<double> info{};
  std::vector<double> y = replicator_step<double>(sys, x.span(), &info);
  if (drift) *drift = info.drift;
  return SimplexPointD::from_coords(std::move(y), 53);
}

SimplexPointD step_zero_sum(const ReplicatorSystem& sys, const SimplexPointD& x, double* drift) {
  if (!sys.zero_sum())
    fail(ErrorKind::unsupported, "step_zero_sum: system is not of a zero-sum kind");
  StepInfo<double> info{};
  std::vector<double> y = replicator_step<double>(sys, x.span(), &info);
  if (drift) *drift = info.drift;
  return SimplexPointD::from_coords(std::move(y), 53);
}

std::vector<double> Orbit::row_as_double(long i) const {
  if (!extended()) return rows_d[i];
  std::vector<double> out(m);
  for (int k = 0; k < m; ++k) out[k] = rows_mp[i][k].to_double();
  return out;
}

std::string Orbit::row_coord_string(long i, int coord) const {
  if (!extended()) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), rows_d[i][coord]);
    (void)ec;
    return std::string(buf, p);
  }
  int digits = std::max(8, precision_bits / 3);
  return rows_mp[i][coord].to_string(digits);
}

namespace {

double log2_or_floor(double v) { return v > 0.0 ? std::log2(v) : -1.0e300; }
double log2_or_floor(const Real& v) { return v.sign() > 0 ? log2(v).to_double() : -1.0e300; }

template <class T>
void record_trace_step(Orbit& orbit, std::span<const T> x, int prec, const T* prev_xi, T* cur_xi) {
  for (const T& v : x) orbit.trace_states.push_back(num::to_double(v));
  if (orbit.m != 3) return;
  const double tie_tol = std::ldexp(1.0, -prec / 2);
  orbit.region.push_back(static_cast<std::int8_t>(region_of_t(x, tie_tol)));
  T third = num::make_like(1.0 / 3.0, x[0]);
  T dist = num::make_like(0.0, x[0]);
  for (const T& v : x) {
    T d = v - third;
    if (d < num::make_like(0.0, x[0])) d = -d;
    dist += d;
  }
  orbit.dist_center.push_back(num::to_double(dist));
  T mn = x[0];
  for (const T& v : x)
    if (v < mn) mn = v;
  orbit.min_coord.push_back(num::to_double(mn));
  *cur_xi = x[0] * x[1] * x[2];
  orbit.log2_xi.push_back(log2_or_floor(*cur_xi));
  if (prev_xi && orbit.kind != DynamicsKind::stable) {
    // xi must not increase beyond the rounding slack
    T slack = *prev_xi * num::make_like(std::ldexp(1.0, -prec + 6), x[0]);
    if (*cur_xi > *prev_xi + slack) ++orbit.xi_increase_steps;
  }
}

}  // namespace

Orbit iterate(const ReplicatorSystem& sys, const SimplexPointD& x0, long n, int precision_bits,
              const IterateOptions& opt) {
  if (n < 1) fail(ErrorKind::parameter, "iterate: need n >= 1");
  if (!(precision_bits == 53 || (precision_bits >= 64 && precision_bits <= 4096)))
    fail(ErrorKind::parameter, "iterate: precision_bits must be 53 or in [64, 4096]");
  if (opt.thinning < 1) fail(ErrorKind::parameter, "iterate: thinning must be >= 1");
  if (x0.dim() != sys.dim()) fail(ErrorKind::dimension, "iterate: x0 dimension mismatch");
  Real::ensure_wide_exponent_range();

  Orbit orbit;
  orbit.m = sys.dim();
  orbit.kind = sys.kind();
  orbit.precision_bits = precision_bits;
  orbit.steps = n;
  orbit.thinning = opt.thinning;
  orbit.drift.reserve(n);
  if (opt.record_trace) {
    orbit.trace_states.reserve((n + 1) * orbit.m);
    if (orbit.m == 3) {
      orbit.region.reserve(n + 1);
      orbit.dist_center.reserve(n + 1);
      orbit.min_coord.reserve(n + 1);
      orbit.log2_xi.reserve(n + 1);
    }
  }
  const double drift_limit = std::ldexp(1.0, -precision_bits / 2);

  auto run = [&](auto zero) {
    using T = decltype(zero);
    std::vector<T> x(orbit.m, zero);
    for (int i = 0; i < orbit.m; ++i) x[i] = num::make_like(x0.coords()[i], zero);
    T xi_prev = zero, xi_cur = zero;
    bool have_prev = false;

    auto store_row = [&](long step) {
      orbit.row_steps.push_back(step);
      if constexpr (std::is_same_v<T, double>)
        orbit.rows_d.push_back(x);
      else
        orbit.rows_mp.push_back(x);
    };

    for (long step = 0;; ++step) {
      if (opt.record_trace)
        record_trace_step<T>(orbit, x, precision_bits, have_prev ? &xi_prev : nullptr, &xi_cur);
      have_prev = true;
      xi_prev = xi_cur;
      if (step % opt.thinning == 0 || step == n) store_row(step);
      if (step == n) break;
      StepInfo<T> info{};
      try {
        x = replicator_step<T>(sys, x, &info);
      } catch (Error& e) {
        if (e.kind() == ErrorKind::invariant)
          fail(ErrorKind::invariant, std::string(e.what()) + " at step " + std::to_string(step + 1));
        throw;
      }
      orbit.drift.push_back(info.drift);
      orbit.clamp_events += info.clamped;
      if (info.drift > orbit.max_drift) orbit.max_drift = info.drift;
      if (info.drift > drift_limit) orbit.drift_flagged = true;
    }
  };

  if (precision_bits == 53)
    run(0.0);
  else
    run(Real(0.0, precision_bits));
  return orbit;
}

}  // namespace replidyn
