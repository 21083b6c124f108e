#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "replidyn/scalar_function.hpp"
#include "replidyn/simplex.hpp"

namespace replidyn {

// Positive scalar field for the combinator catalog: a constant, or
// (1 + sum_i x_i)^r. Restricting to this declarative set keeps expression
// trees serializable and lets bounds propagate analytically.
struct ScalarField {
  enum class Kind { constant, sum_power };
  Kind kind = Kind::constant;
  double value = 1.0;  // constant
  double r = 1.0;      // sum_power exponent

  static ScalarField constant(double v) {
    if (!(v > 0.0)) fail(ErrorKind::parameter, "scalar field constant must be > 0");
    ScalarField f;
    f.kind = Kind::constant;
    f.value = v;
    return f;
  }
  static ScalarField sum_power(double r) {
    ScalarField f;
    f.kind = Kind::sum_power;
    f.r = r;
    return f;
  }

  template <class T>
  T eval(std::span<const T> x) const {
    if (kind == Kind::constant) return num::make_like(value, x[0]);
    using std::pow;
    T s = num::sum(x) + 1.0;
    return pow(s, num::make_like(r, x[0]));
  }

  double max_on_box(double side, int m) const {
    if (kind == Kind::constant) return value;
    double hi = 1.0 + side * m;
    return r >= 0.0 ? std::pow(hi, r) : 1.0;
  }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Catalog primitives (gradient fields of symmetric strictly Schur-convex
// potentials) and the closure combinators.
struct IdentityNode {};
struct SwapFirstTwoNode {};  // order-swapping map; negative control, not SOP
struct CompleteSymmetricNode { int k = 1; };
struct GaugeNode { double p = 2.0; };
struct GammaProductNode { double a = 2.0; };
struct SeparableNode { ScalarFunctionSpec f; };
struct SymmetricCompositeNode { int k = 1; ScalarFunctionSpec f; };
struct QuadraticSymmetricNode { double w1 = 1.0; double w2 = 0.0; };
struct CompositionNode { ExprPtr psi; ScalarFunctionSpec h; };
struct AffineShiftNode { ExprPtr child; ScalarField phi; ScalarField psi; };
struct ConicCombinationNode { ScalarField phi; ExprPtr first; ScalarField psi; ExprPtr second; };
struct PostComposeNode { ScalarFunctionSpec h; ExprPtr child; };
struct PreComposeNode { ExprPtr child; ScalarFunctionSpec h; };
struct ComposeNode { ExprPtr outer; ExprPtr inner; };
struct HadamardNode { ExprPtr first; ExprPtr second; };
struct NormalizeNode { ExprPtr child; double epsilon = 0.1; double m1 = 1.0; };

struct Expr {
  std::variant<IdentityNode, SwapFirstTwoNode, CompleteSymmetricNode, GaugeNode, GammaProductNode,
               SeparableNode, SymmetricCompositeNode, QuadraticSymmetricNode, CompositionNode,
               AffineShiftNode, ConicCombinationNode, PostComposeNode, PreComposeNode, ComposeNode,
               HadamardNode, NormalizeNode>
      node;
};

enum class BoundKind { analytic, sampled };

struct Bound {
  double value = 1.0;
  BoundKind kind = BoundKind::analytic;
};

// A similar-order preserving fitness mapping F: B+^m -> R^m as an expression
// tree over the catalog, with a declared upper bound used by normalize().
class FitnessMap {
 public:
  FitnessMap(ExprPtr root, int m, bool force_sampled_bound = false);

  int dim() const { return m_; }
  const Expr& expr() const { return *root_; }
  const ExprPtr& root() const { return root_; }
  Bound declared_bound() const { return bound_; }

  // Domain-checked evaluation (x in B+^m up to a small slack).
  std::vector<double> evaluate(std::span<const double> x) const;
  std::vector<Real> evaluate(std::span<const Real> x) const;
  std::vector<double> evaluate(const std::vector<double>& x) const {
    return evaluate(std::span<const double>(x));
  }

  // Unchecked evaluation into a preallocated buffer (hot path).
  void evaluate_into(std::span<const double> x, std::vector<double>& out) const;
  void evaluate_into(std::span<const Real> x, std::vector<Real>& out) const;

  // Wraps this map as F_hat = (F + eps)/M1, M1 = max(M + eps, 1).
  FitnessMap normalized(double epsilon) const;

  nlohmann::json to_json() const;
  static FitnessMap from_json(const nlohmann::json& j);

  std::string describe() const;

 private:
  ExprPtr root_;
  int m_ = 0;
  Bound bound_;
};

// Primitive constructors (the seven catalog families plus the identity).
FitnessMap identity_map(int m);
FitnessMap swap_first_two_map(int m);  // negative control
FitnessMap grad_complete_symmetric(int k, int m);
FitnessMap grad_gauge(double p, int m);
FitnessMap grad_gamma_product(double a, int m);
FitnessMap grad_separable(const ScalarFunctionSpec& f, int m);
FitnessMap grad_symmetric_composite(int k, const ScalarFunctionSpec& f, int m);
FitnessMap grad_quadratic_symmetric(double w1, double w2, int m);
FitnessMap grad_composition(const FitnessMap& psi_gradient, const ScalarFunctionSpec& h);

// Combinators (the six closure constructions).
FitnessMap affine_shift(const FitnessMap& f, const ScalarField& phi, const ScalarField& psi);
FitnessMap conic_combination(const ScalarField& phi, const FitnessMap& f, const ScalarField& psi,
                             const FitnessMap& g);
FitnessMap post_compose(const ScalarFunctionSpec& h, const FitnessMap& f);
FitnessMap pre_compose(const FitnessMap& f, const ScalarFunctionSpec& h);
FitnessMap compose(const FitnessMap& outer, const FitnessMap& inner);
FitnessMap hadamard(const FitnessMap& f, const FitnessMap& g);

// Scalar potential of a primitive gradient node at x (finite-difference
// oracle support); combinators have no scalar potential.
bool has_potential(const FitnessMap& map);
double potential(const FitnessMap& map, std::span<const double> x);

// psi(t) to <= 1e-13 relative error (upward recurrence to t >= 8, then a
// 6-term asymptotic tail).
double digamma(double t);

struct SopViolation {
  std::vector<double> point;
  int i = 0, j = 0;  // 1-based offending pair
  double xi = 0, xj = 0, fi = 0, fj = 0;
  std::string domain;  // "simplex" or "ball"
};

struct SopReport {
  int samples = 0;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  long checked = 0;           // points evaluated
  long total_violations = 0;  // offending pairs (list below is capped)
  std::vector<SopViolation> violations;
  bool pass() const { return total_violations == 0; }
  nlohmann::json to_json() const;
};

// Randomized certificate of the similar-order property: draws `samples`
// points from the simplex and from B+^m and compares order patterns of x and
// F(x). A failing report is a valid return, not an error.
SopReport verify_sop(const FitnessMap& map, int samples, std::uint64_t seed, double tol = 1e-12);

// Declared bound for analytic maps; sampled maximum over B+^m times a 1.1
// safety factor otherwise.
double bound_estimate(const FitnessMap& map, int grid);

}  // namespace replidyn
