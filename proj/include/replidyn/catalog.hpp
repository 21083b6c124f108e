#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "replidyn/fitness.hpp"

namespace replidyn {

struct CatalogEntry {
  std::string name;
  std::string kind;  // "primitive" or "combinator"
  std::string parameters;
  std::string notes;
};

// The seven primitive families and six combinators, with parameter schemas.
std::vector<CatalogEntry> catalog_entries();

// Reference parameterizations used by the verification suites: two instances
// per primitive family at dimension m.
std::vector<FitnessMap> catalog_primitive_instances(int m);

// One instance per combinator, applied to arguments drawn from the primitive
// instances (seeded choice).
std::vector<FitnessMap> catalog_combinator_instances(int m, std::uint64_t seed);

struct GradientCheckResult {
  std::string map;
  int points = 0;
  double max_rel_error = 0.0;
  bool pass = false;
};

// Central finite differences of the scalar potential against the gradient
// primitive at random interior points of B+^m.
GradientCheckResult gradient_check(const FitnessMap& map, int points, std::uint64_t seed,
                                   double rel_tol = 1e-6);

struct CatalogCheckReport {
  int samples = 0;
  std::uint64_t seed = 0;
  long sop_maps_checked = 0;
  long sop_violations = 0;
  std::vector<std::string> sop_failures;  // map descriptions with violations
  std::vector<GradientCheckResult> gradient_checks;
  bool pass() const;
  nlohmann::json to_json() const;
};

// Full catalog verification: verify_sop over every primitive instance and
// every combinator instance, plus gradient-vs-finite-difference checks.
// inject_broken adds the order-swapping map (expected to produce violations).
CatalogCheckReport catalog_check(const std::vector<int>& dims, int samples, std::uint64_t seed,
                                 bool inject_broken);

}  // namespace replidyn
