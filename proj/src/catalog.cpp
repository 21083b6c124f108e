#include "replidyn/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "replidyn/rng.hpp"

namespace replidyn {

std::vector<CatalogEntry> catalog_entries() {
  return {
      {"complete_symmetric", "primitive", "k: integer in [1, m]",
       "gradient of the complete homogeneous symmetric polynomial phi_k"},
      {"gauge", "primitive", "p: real > 1", "gradient of the l_p norm"},
      {"gamma_product", "primitive", "a: real >= 1",
       "gradient of prod_k Gamma(x_k + a)"},
      {"separable", "primitive", "f: power(q>1, scale>0) | exponential(scale>0)",
       "gradient of sum_k f(x_k), f strictly increasing and strictly convex"},
      {"symmetric_composite", "primitive", "k: integer in [1, m]; f: exponential(scale>0)",
       "gradient of e_k(f(x_1),...,f(x_m))"},
      {"quadratic_symmetric", "primitive", "w1: real > 0; w2: real >= 0",
       "gradient of w1*sum x_i^2 + w2*(sum x_i)^2 (general convex symmetric family)"},
      {"composition", "primitive", "psi: catalog gradient; h: power | exponential",
       "gradient of psi-potential composed with h applied coordinatewise"},
      {"affine_shift", "combinator", "phi, psi: positive scalar fields",
       "phi(x) F(x) + psi(x) * ones"},
      {"conic_combination", "combinator", "phi, psi: positive scalar fields",
       "phi(x) F(x) + psi(x) G(x)"},
      {"post_compose", "combinator", "h: strictly increasing scalar function",
       "h applied to each component of F"},
      {"pre_compose", "combinator", "h: strictly increasing scalar function",
       "F evaluated at (h(x_1),...,h(x_m))"},
      {"compose", "combinator", "", "F applied to G(x)"},
      {"hadamard", "combinator", "", "componentwise product of two positive maps"},
  };
}

std::vector<FitnessMap> catalog_primitive_instances(int m) {
  std::vector<FitnessMap> out;
  // Two parameterizations per family. k >= 2 keeps complete_symmetric
  // strictly order preserving (k = 1 has constant gradient); k <= m-1 keeps
  // symmetric_composite strict with the exponential kind.
  out.push_back(grad_complete_symmetric(2, m));
  out.push_back(grad_complete_symmetric(std::max(2, m - 1), m));
  out.push_back(grad_gauge(2.0, m));
  out.push_back(grad_gauge(3.5, m));
  out.push_back(grad_gamma_product(1.5, m));
  out.push_back(grad_gamma_product(2.5, m));
  out.push_back(grad_separable(ScalarFunctionSpec::power(2.0), m));
  out.push_back(grad_separable(ScalarFunctionSpec::exponential(1.0), m));
  int kc = std::max(1, std::min(2, m - 1));
  out.push_back(grad_symmetric_composite(kc, ScalarFunctionSpec::exponential(1.0), m));
  out.push_back(grad_symmetric_composite(kc, ScalarFunctionSpec::exponential(2.0), m));
  out.push_back(grad_quadratic_symmetric(1.0, 0.5, m));
  out.push_back(grad_quadratic_symmetric(2.0, 1.0, m));
  out.push_back(grad_composition(grad_gauge(2.0, m), ScalarFunctionSpec::power(2.0)));
  out.push_back(grad_composition(grad_complete_symmetric(2, m),
                                 ScalarFunctionSpec::exponential(1.0)));
  return out;
}

std::vector<FitnessMap> catalog_combinator_instances(int m, std::uint64_t seed) {
  std::vector<FitnessMap> prims = catalog_primitive_instances(m);
  SampleRng rng(seed);
  auto pick = [&]() -> const FitnessMap& {
    return prims[rng.next_u64() % prims.size()];
  };
  std::vector<FitnessMap> out;
  out.push_back(affine_shift(pick(), ScalarField::constant(1.5), ScalarField::sum_power(1.0)));
  out.push_back(conic_combination(ScalarField::constant(1.0), pick(),
                                  ScalarField::sum_power(-0.5), pick()));
  out.push_back(post_compose(
      ScalarFunctionSpec::tabulated({{0.0, 0.1}, {0.5, 0.35}, {1.0, 0.8}, {2.0, 2.0}, {5.0, 8.0}}),
      pick()));
  out.push_back(pre_compose(pick(), ScalarFunctionSpec::exponential(0.5)));
  out.push_back(compose(pick(), pick()));
  out.push_back(hadamard(pick(), pick()));
  return out;
}

GradientCheckResult gradient_check(const FitnessMap& map, int points, std::uint64_t seed,
                                   double rel_tol) {
  if (!has_potential(map))
    fail(ErrorKind::unsupported, "gradient_check: map has no scalar potential");
  GradientCheckResult res;
  res.map = map.describe();
  res.points = points;
  SampleRng rng(seed);
  const int m = map.dim();
  const double h = 6e-6;
  std::vector<double> f;
  for (int p = 0; p < points; ++p) {
    // interior point of B+ kept away from the boundary so x +- h stays valid
    std::vector<double> x = rng.simplex_point(m);
    double scale = 0.2 + 0.7 * rng.uniform01();
    bool ok = true;
    for (double& v : x) {
      v *= scale;
      ok = ok && v > 0.01;
    }
    if (!ok) {
      --p;  // resample degenerate draws deterministically
      continue;
    }
    map.evaluate_into(std::span<const double>(x), f);
    for (int k = 0; k < m; ++k) {
      std::vector<double> hi = x, lo = x;
      hi[k] += h;
      lo[k] -= h;
      double fd = (potential(map, hi) - potential(map, lo)) / (2.0 * h);
      double denom = std::max(std::abs(f[k]), 1e-12);
      res.max_rel_error = std::max(res.max_rel_error, std::abs(fd - f[k]) / denom);
    }
  }
  res.pass = res.max_rel_error <= rel_tol;
  return res;
}

bool CatalogCheckReport::pass() const {
  if (sop_violations != 0) return false;
  for (const auto& g : gradient_checks)
    if (!g.pass) return false;
  return true;
}

nlohmann::json CatalogCheckReport::to_json() const {
  nlohmann::json gc = nlohmann::json::array();
  for (const auto& g : gradient_checks)
    gc.push_back({{"map", g.map},
                  {"points", g.points},
                  {"max_rel_error", g.max_rel_error},
                  {"pass", g.pass}});
  return {{"samples", samples},
          {"seed", seed},
          {"sop_maps_checked", sop_maps_checked},
          {"sop_violations", sop_violations},
          {"sop_failures", sop_failures},
          {"gradient_checks", gc},
          {"pass", pass()}};
}

CatalogCheckReport catalog_check(const std::vector<int>& dims, int samples, std::uint64_t seed,
                                 bool inject_broken) {
  CatalogCheckReport report;
  report.samples = samples;
  report.seed = seed;
  for (int m : dims) {
    std::vector<FitnessMap> maps = catalog_primitive_instances(m);
    std::vector<FitnessMap> combs = catalog_combinator_instances(m, seed ^ (0xABCDu + m));
    maps.insert(maps.end(), combs.begin(), combs.end());
    if (inject_broken) maps.push_back(swap_first_two_map(m));
    for (const FitnessMap& map : maps) {
      SopReport r = verify_sop(map, samples, seed, 1e-12);
      ++report.sop_maps_checked;
      if (!r.pass()) {
        report.sop_violations += r.total_violations;
        report.sop_failures.push_back("m=" + std::to_string(m) + " " + map.describe());
      }
    }
    for (const FitnessMap& map : catalog_primitive_instances(m))
      report.gradient_checks.push_back(gradient_check(map, 100, seed ^ (0xFEEDu + m)));
  }
  return report;
}

}  // namespace replidyn
