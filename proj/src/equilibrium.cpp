#include "replidyn/equilibrium.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "replidyn/rng.hpp"

namespace replidyn {

const char* to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::stable_asymptotic: return "stable_asymptotic";
    case StabilityVerdict::unstable: return "unstable";
    case StabilityVerdict::undetermined: return "undetermined";
  }
  return "?";
}

int worker_thread_count(int requested) {
  if (const char* env = std::getenv("REPLIDYN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return std::min(n, 64);
  }
  if (requested > 0) return std::min(requested, 64);
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

std::vector<SimplexPointD> rest_point_candidates(int m) {
  if (m < 2 || m > 12)
    fail(ErrorKind::parameter, "rest_point_candidates: m must lie in [2, 12] (2^m enumeration)");
  std::vector<SimplexPointD> out;
  out.reserve((1u << m) - 1);
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<int> idx;
    for (int b = 0; b < m; ++b)
      if (mask & (1u << b)) idx.push_back(b + 1);
    out.push_back(face_center(Face(std::move(idx), m)));
  }
  return out;
}

NashResult is_nash(const ReplicatorSystem& sys, const SimplexPointD& x, double tol) {
  if (sys.kind() != DynamicsKind::stable)
    fail(ErrorKind::unsupported, "is_nash: defined for the stable kind");
  std::vector<double> f = sys.fitness().evaluate(x.span());
  double avg = 0.0, hi = f[0];
  for (int i = 0; i < x.dim(); ++i) {
    avg += x.coords()[i] * f[i];
    hi = std::max(hi, f[i]);
  }
  NashResult r;
  r.residual = hi - avg;
  r.is_nash = r.residual <= tol;
  return r;
}

bool is_strict_nash(const ReplicatorSystem& sys, const SimplexPointD& x, double tol) {
  if (sys.kind() != DynamicsKind::stable)
    fail(ErrorKind::unsupported, "is_strict_nash: defined for the stable kind");
  const int m = x.dim();
  int k = 0;
  for (int i = 1; i < m; ++i)
    if (x.coords()[i] > x.coords()[k]) k = i;
  double dist = 0.0;
  for (int i = 0; i < m; ++i) dist += std::abs(x.coords()[i] - (i == k ? 1.0 : 0.0));
  if (dist > tol) return false;
  std::vector<double> vertex(m, 0.0);
  vertex[k] = 1.0;
  std::vector<double> f = sys.fitness().evaluate(std::span<const double>(vertex));
  for (int i = 0; i < m; ++i)
    if (i != k && !(f[k] > f[i] + tol)) return false;
  return true;
}

namespace {

double l1_dist(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// Perturbed start within l1-distance `radius` of x: convex mix toward a
// random simplex point, scaled to a uniform radius fraction.
std::vector<double> perturbed_start(SampleRng& rng, std::span<const double> x, double radius) {
  const int m = static_cast<int>(x.size());
  for (;;) {
    std::vector<double> z = rng.simplex_point(m);
    double d = l1_dist(x, z);
    if (d < 1e-9) continue;
    double u = radius * rng.uniform_pos() / d;
    if (u > 1.0) u = 1.0;
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = (1.0 - u) * x[i] + u * z[i];
    return y;
  }
}

}  // namespace

StabilityVerdict probe_stability(const ReplicatorSystem& sys, const SimplexPointD& x,
                                 const ProbeOptions& opt) {
  StepInfo<double> info{};
  std::vector<double> once = replicator_step<double>(sys, x.span(), &info);
  if (l1_dist(once, x.span()) > opt.rest_tol)
    fail(ErrorKind::precondition, "probe_stability: point is not a rest point (residual " +
                                      std::to_string(l1_dist(once, x.span())) + ")");
  SampleRng rng(opt.seed);
  bool all_converged = true;
  for (int p = 0; p < opt.probes; ++p) {
    std::vector<double> y = perturbed_start(rng, x.span(), opt.radius);
    int consecutive = 0;
    bool converged = false;
    for (long n = 0; n < opt.horizon; ++n) {
      y = replicator_step<double>(sys, y, nullptr);
      double d = l1_dist(y, x.span());
      if (d > 10.0 * opt.radius) return StabilityVerdict::unstable;
      if (d > 3.0 * opt.radius) all_converged = false;
      if (d <= opt.conv_tol) {
        if (++consecutive >= 100) {
          converged = true;
          break;
        }
      } else {
        consecutive = 0;
      }
    }
    if (!converged) all_converged = false;
  }
  return all_converged ? StabilityVerdict::stable_asymptotic : StabilityVerdict::undetermined;
}

SimplexPointD predict_limit(const SimplexPointD& x0, double tie_tol) {
  std::vector<int> supp = x0.support();
  Face face(supp, x0.dim());
  std::vector<int> beta = max_ind(x0.span(), face, tie_tol);
  return face_center(Face(beta, x0.dim()));
}

double lyapunov_M(const SimplexPointD& x, const Face& face, int k) {
  if (!face.contains(k)) fail(ErrorKind::parameter, "lyapunov_M: k not in the face");
  for (int i = 0; i < x.dim(); ++i)
    if (x.coords()[i] > 0.0 && !face.contains(i + 1))
      fail(ErrorKind::domain, "lyapunov_M: support of x is not inside the face");
  return lyapunov_M_t(x.span(), face, k);
}

nlohmann::json EquilibriumReport::to_json() const {
  return {{"point", point.coords()},
          {"is_rest", is_rest},
          {"rest_residual", rest_residual},
          {"is_nash", nash.is_nash},
          {"nash_residual", nash.residual},
          {"is_strict_nash", is_strict_nash},
          {"stability", std::string(to_string(stability))},
          {"probes_run", probes_run}};
}

nlohmann::json FolkCertificate::to_json() const {
  auto clause = [](const ClauseResult& c) {
    return nlohmann::json{{"pass", c.pass}, {"witness", c.witness}};
  };
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : candidates) cands.push_back(c.to_json());
  nlohmann::json trs = nlohmann::json::array();
  for (const auto& t : trials)
    trs.push_back({{"start", t.start},
                   {"predicted_limit", t.predicted_limit},
                   {"converged_at", t.converged_at},
                   {"final_residual", t.final_residual},
                   {"max_ind_constant", t.max_ind_constant},
                   {"lyapunov_monotone", t.lyapunov_monotone},
                   {"pass", t.pass}});
  return {{"clause_i_nash_are_rest", clause(nash_are_rest)},
          {"clause_ii_stable_are_nash", clause(stable_are_nash)},
          {"clause_iii_strict_nash_asymptotically_stable", clause(strict_nash_stable)},
          {"clause_iv_interior_orbits_converge_to_nash", clause(interior_convergence)},
          {"candidates", cands},
          {"trials", trs},
          {"pass", pass()}};
}

namespace {

std::string point_str(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(x[i]);
  }
  return s + ")";
}

TrialRecord run_trial(const ReplicatorSystem& sys, const std::vector<double>& start,
                      const FolkOptions& opt) {
  const int m = sys.dim();
  TrialRecord rec;
  rec.start = start;
  Face full = Face::full(m);
  SimplexPointD x0 = SimplexPointD::from_coords(std::vector<double>(start), 53);
  std::vector<int> beta = max_ind(x0.span(), full, 1e-12);
  SimplexPointD limit = face_center(Face(beta, m));
  rec.predicted_limit = limit.coords();

  std::vector<double> x = x0.coords();
  std::vector<double> prev_M(m), cur_M(m);
  for (int k = 1; k <= m; ++k) prev_M[k - 1] = lyapunov_M_t(std::span<const double>(x), full, k);

  int consecutive = 0;
  for (long n = 0; n < opt.horizon; ++n) {
    x = replicator_step<double>(sys, x, nullptr);
    std::vector<int> mi = max_ind(std::span<const double>(x), full, 0.0);
    if (mi != beta) {
      rec.max_ind_constant = false;
      break;
    }
    for (int k = 1; k <= m; ++k) {
      cur_M[k - 1] = lyapunov_M_t(std::span<const double>(x), full, k);
      if (cur_M[k - 1] < prev_M[k - 1] - opt.lyap_slack) {
        rec.lyapunov_monotone = false;
        break;
      }
    }
    if (!rec.lyapunov_monotone) break;
    std::swap(prev_M, cur_M);
    double d = l1_dist(x, limit.span());
    if (d <= opt.tol) {
      if (++consecutive >= 100) {
        rec.converged_at = n - 99;
        break;
      }
    } else {
      consecutive = 0;
    }
  }
  rec.final_residual = l1_dist(x, limit.span());
  rec.pass = rec.max_ind_constant && rec.lyapunov_monotone && rec.converged_at >= 0;
  return rec;
}

}  // namespace

FolkCertificate certify_folk_theorem(const ReplicatorSystem& sys, const FolkOptions& opt) {
  if (sys.kind() != DynamicsKind::stable)
    fail(ErrorKind::unsupported, "certify_folk_theorem: stable kind only");
  const int m = sys.dim();
  if (m > 8) fail(ErrorKind::parameter, "certify_folk_theorem: m must be <= 8");

  FolkCertificate cert;

  // Candidate sweep: the face centers.
  std::vector<SimplexPointD> candidates = rest_point_candidates(m);
  for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
    const SimplexPointD& c = candidates[ci];
    EquilibriumReport rep{c};
    StepInfo<double> info{};
    std::vector<double> next = replicator_step<double>(sys, c.span(), &info);
    rep.rest_residual = l1_dist(next, c.span());
    rep.is_rest = rep.rest_residual <= opt.rest_tol;
    rep.nash = is_nash(sys, c, opt.rest_tol);
    rep.is_strict_nash = is_strict_nash(sys, c, 1e-9);
    ProbeOptions popt = opt.probe;
    popt.seed = opt.seed ^ (0xC0FFEEull + ci);
    rep.stability = probe_stability(sys, c, popt);
    rep.probes_run = popt.probes;
    cert.candidates.push_back(std::move(rep));
  }

  // (i) every Nash among the candidates is a rest point
  for (const auto& rep : cert.candidates) {
    if (rep.nash.is_nash && !rep.is_rest) {
      cert.nash_are_rest.pass = false;
      cert.nash_are_rest.witness = "Nash candidate with rest residual " +
                                   std::to_string(rep.rest_residual) + " at " +
                                   point_str(rep.point.span());
      break;
    }
  }
  // (ii) every probe-stable rest point is Nash
  for (const auto& rep : cert.candidates) {
    if (rep.stability == StabilityVerdict::stable_asymptotic && !rep.nash.is_nash) {
      cert.stable_are_nash.pass = false;
      cert.stable_are_nash.witness =
          "probe-stable rest point failing the Nash test at " + point_str(rep.point.span());
      break;
    }
  }
  // (iii) every strict Nash is asymptotically stable
  for (const auto& rep : cert.candidates) {
    if (rep.is_strict_nash && rep.stability != StabilityVerdict::stable_asymptotic) {
      cert.strict_nash_stable.pass = false;
      cert.strict_nash_stable.witness = std::string("strict Nash with probe verdict ") +
                                        to_string(rep.stability) + " at " +
                                        point_str(rep.point.span());
      break;
    }
  }

  // (iv) interior trials converge to the predicted face center
  std::vector<std::vector<double>> starts;
  starts.reserve(opt.trials);
  SampleRng rng(opt.seed);
  for (int t = 0; t < opt.trials; ++t) starts.push_back(rng.interior_simplex_point(m, 1e-12));

  cert.trials.resize(opt.trials);
  const int threads = worker_thread_count(opt.threads);
  if (threads <= 1 || opt.trials <= 1) {
    for (int t = 0; t < opt.trials; ++t) cert.trials[t] = run_trial(sys, starts[t], opt);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next_trial{0};
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          int t = next_trial.fetch_add(1);
          if (t >= opt.trials) return;
          cert.trials[t] = run_trial(sys, starts[t], opt);
        }
      });
    for (auto& th : pool) th.join();
  }
  for (int t = 0; t < opt.trials; ++t) {
    if (!cert.trials[t].pass) {
      const TrialRecord& r = cert.trials[t];
      cert.interior_convergence.pass = false;
      cert.interior_convergence.witness =
          "trial " + std::to_string(t) + " from " + point_str(r.start) +
          (!r.max_ind_constant      ? ": MaxInd changed along the orbit"
           : !r.lyapunov_monotone   ? ": Lyapunov M decreased"
                                    : ": no convergence within the horizon (residual " +
                                          std::to_string(r.final_residual) + ")");
      break;
    }
  }
  return cert;
}

}  // namespace replidyn
