#include "replidyn/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "replidyn/rng.hpp"

namespace replidyn {

namespace {

using nlohmann::json;

const char* node_name(const Expr& e) {
  struct Namer {
    const char* operator()(const IdentityNode&) { return "identity"; }
    const char* operator()(const SwapFirstTwoNode&) { return "swap_first_two"; }
    const char* operator()(const CompleteSymmetricNode&) { return "complete_symmetric"; }
    const char* operator()(const GaugeNode&) { return "gauge"; }
    const char* operator()(const GammaProductNode&) { return "gamma_product"; }
    const char* operator()(const SeparableNode&) { return "separable"; }
    const char* operator()(const SymmetricCompositeNode&) { return "symmetric_composite"; }
    const char* operator()(const QuadraticSymmetricNode&) { return "quadratic_symmetric"; }
    const char* operator()(const CompositionNode&) { return "composition"; }
    const char* operator()(const AffineShiftNode&) { return "affine_shift"; }
    const char* operator()(const ConicCombinationNode&) { return "conic_combination"; }
    const char* operator()(const PostComposeNode&) { return "post_compose"; }
    const char* operator()(const PreComposeNode&) { return "pre_compose"; }
    const char* operator()(const ComposeNode&) { return "compose"; }
    const char* operator()(const HadamardNode&) { return "hadamard"; }
    const char* operator()(const NormalizeNode&) { return "normalize"; }
  };
  return std::visit(Namer{}, e.node);
}

template <class T>
void eval_expr(const Expr& e, std::span<const T> x, std::vector<T>& out);

template <class T>
void eval_child(const Expr& parent, const ExprPtr& child, std::span<const T> x,
                std::vector<T>& out) {
  try {
    eval_expr(*child, x, out);
  } catch (Error& err) {
    if (err.kind() == ErrorKind::numeric)
      fail(ErrorKind::numeric, std::string(node_name(parent)) + "/" + err.what());
    throw;
  }
}

// Complete homogeneous symmetric polynomials h_0..h_top of x, by the
// in-place recurrence h_t += x_i * h_{t-1}.
template <class T>
std::vector<T> complete_h(std::span<const T> x, int top) {
  std::vector<T> h(top + 1, num::make_like(0.0, x[0]));
  h[0] = num::make_like(1.0, x[0]);
  for (const T& xi : x)
    for (int t = 1; t <= top; ++t) h[t] += xi * h[t - 1];
  return h;
}

// Elementary symmetric polynomials e_0..e_top of u.
template <class T>
std::vector<T> elementary_e(std::span<const T> u, int top) {
  std::vector<T> e(top + 1, num::make_like(0.0, u[0]));
  e[0] = num::make_like(1.0, u[0]);
  int seen = 0;
  for (const T& ui : u) {
    ++seen;
    for (int t = std::min(top, seen); t >= 1; --t) e[t] += ui * e[t - 1];
  }
  return e;
}

template <class T>
struct EvalVisitor {
  std::span<const T> x;
  std::vector<T>& out;
  const Expr& self;

  int m() const { return static_cast<int>(x.size()); }
  T zero() const { return num::make_like(0.0, x[0]); }

  void operator()(const IdentityNode&) { out.assign(x.begin(), x.end()); }

  void operator()(const SwapFirstTwoNode&) {
    out.assign(x.begin(), x.end());
    std::swap(out[0], out[1]);
  }

  void operator()(const CompleteSymmetricNode& n) {
    // d h_k / d x_j = sum_{l=0}^{k-1} x_j^l h_{k-1-l}(x), Horner in x_j.
    std::vector<T> h = complete_h(x, n.k - 1);
    out.assign(m(), zero());
    for (int j = 0; j < m(); ++j) {
      T acc = h[0];
      for (int t = 1; t <= n.k - 1; ++t) acc = acc * x[j] + h[t];
      out[j] = acc;
    }
  }

  void operator()(const GaugeNode& n) {
    using std::pow;
    T s = zero();
    for (const T& xi : x) s += pow(xi, num::make_like(n.p, x[0]));
    out.assign(m(), zero());
    if (num::to_double(s) == 0.0) return;  // gradient of ||.||_p at 0: zero by convention
    using std::exp;
    using std::log;
    T norm = pow(s, num::make_like(1.0 / n.p, x[0]));
    for (int j = 0; j < m(); ++j) out[j] = pow(x[j] / norm, num::make_like(n.p - 1.0, x[0]));
  }

  void operator()(const GammaProductNode& n) {
    using std::tgamma;
    T prod = num::make_like(1.0, x[0]);
    for (const T& xi : x) prod *= tgamma(xi + num::make_like(n.a, x[0]));
    out.assign(m(), zero());
    using num::digamma;
    for (int j = 0; j < m(); ++j) out[j] = prod * digamma(x[j] + num::make_like(n.a, x[0]));
  }

  void operator()(const SeparableNode& n) {
    out.assign(m(), zero());
    for (int j = 0; j < m(); ++j) out[j] = n.f.derivative(x[j]);
  }

  void operator()(const SymmetricCompositeNode& n) {
    // component j = f'(x_j) * e_{k-1}(f(x) without j)
    std::vector<T> u(m(), zero());
    for (int i = 0; i < m(); ++i) u[i] = n.f.value(x[i]);
    std::vector<T> e = elementary_e(std::span<const T>(u), n.k - 1);
    out.assign(m(), zero());
    std::vector<T> d(n.k, zero());
    for (int j = 0; j < m(); ++j) {
      d[0] = num::make_like(1.0, x[0]);
      for (int t = 1; t <= n.k - 1; ++t) d[t] = e[t] - u[j] * d[t - 1];
      out[j] = n.f.derivative(x[j]) * d[n.k - 1];
    }
  }

  void operator()(const QuadraticSymmetricNode& n) {
    T s = num::sum(x);
    out.assign(m(), zero());
    for (int j = 0; j < m(); ++j)
      out[j] = num::make_like(2.0 * n.w1, x[0]) * x[j] + num::make_like(2.0 * n.w2, x[0]) * s;
  }

  void operator()(const CompositionNode& n) {
    std::vector<T> u(m(), zero());
    for (int i = 0; i < m(); ++i) u[i] = n.h.value(x[i]);
    std::vector<T> g;
    eval_child(self, n.psi, std::span<const T>(u), g);
    out.assign(m(), zero());
    for (int j = 0; j < m(); ++j) out[j] = g[j] * n.h.derivative(x[j]);
  }

  void operator()(const AffineShiftNode& n) {
    eval_child(self, n.child, x, out);
    T a = n.phi.eval(x), b = n.psi.eval(x);
    for (T& v : out) v = a * v + b;
  }

  void operator()(const ConicCombinationNode& n) {
    std::vector<T> g;
    eval_child(self, n.first, x, out);
    eval_child(self, n.second, x, g);
    T a = n.phi.eval(x), b = n.psi.eval(x);
    for (int j = 0; j < m(); ++j) out[j] = a * out[j] + b * g[j];
  }

  void operator()(const PostComposeNode& n) {
    eval_child(self, n.child, x, out);
    for (T& v : out) v = n.h.value(v);
  }

  void operator()(const PreComposeNode& n) {
    std::vector<T> u(m(), zero());
    for (int i = 0; i < m(); ++i) u[i] = n.h.value(x[i]);
    eval_child(self, n.child, std::span<const T>(u), out);
  }

  void operator()(const ComposeNode& n) {
    std::vector<T> u;
    eval_child(self, n.inner, x, u);
    eval_child(self, n.outer, std::span<const T>(u), out);
  }

  void operator()(const HadamardNode& n) {
    std::vector<T> g;
    eval_child(self, n.first, x, out);
    eval_child(self, n.second, x, g);
    for (int j = 0; j < m(); ++j) out[j] *= g[j];
  }

  void operator()(const NormalizeNode& n) {
    eval_child(self, n.child, x, out);
    T eps = num::make_like(n.epsilon, x[0]);
    T m1 = num::make_like(n.m1, x[0]);
    for (T& v : out) v = (v + eps) / m1;
  }
};

template <class T>
void eval_expr(const Expr& e, std::span<const T> x, std::vector<T>& out) {
  EvalVisitor<T> vis{x, out, e};
  std::visit(vis, e.node);
  for (const T& v : out)
    if (!num::finite(v)) fail(ErrorKind::numeric, node_name(e));
}

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Upper bound of all components over the box [0, side]^m. Every catalog node
// admits an analytic bound, so bound propagation never needs sampling unless
// the caller forces it.
double box_bound(const Expr& e, double side, int m) {
  struct Bounder {
    double side;
    int m;
    const Expr& self;

    double child(const ExprPtr& c, double s) const { return box_bound(*c, s, m); }

    double operator()(const IdentityNode&) const { return side; }
    double operator()(const SwapFirstTwoNode&) const { return side; }
    double operator()(const CompleteSymmetricNode& n) const {
      // h_t over the box is at most C(m+t-1, t) side^t
      double b = 0.0;
      for (int l = 0; l <= n.k - 1; ++l) {
        int t = n.k - 1 - l;
        b += std::pow(side, l) * binom(m + t - 1, t) * std::pow(side, t);
      }
      return b;
    }
    double operator()(const GaugeNode&) const { return 1.0; }
    double operator()(const GammaProductNode& n) const {
      double gmax = std::max(std::tgamma(n.a), std::tgamma(side + n.a));
      double psi_hi = num::digamma(side + n.a);
      return std::pow(gmax, m) * std::max(psi_hi, 0.0);
    }
    double operator()(const SeparableNode& n) const { return n.f.max_derivative(side); }
    double operator()(const SymmetricCompositeNode& n) const {
      return n.f.max_derivative(side) * binom(m - 1, n.k - 1) *
             std::pow(n.f.max_value(side), n.k - 1);
    }
    double operator()(const QuadraticSymmetricNode& n) const {
      return 2.0 * n.w1 * side + 2.0 * n.w2 * m * side;
    }
    double operator()(const CompositionNode& n) const {
      return child(n.psi, n.h.max_value(side)) * n.h.max_derivative(side);
    }
    double operator()(const AffineShiftNode& n) const {
      return n.phi.max_on_box(side, m) * child(n.child, side) + n.psi.max_on_box(side, m);
    }
    double operator()(const ConicCombinationNode& n) const {
      return n.phi.max_on_box(side, m) * child(n.first, side) +
             n.psi.max_on_box(side, m) * child(n.second, side);
    }
    double operator()(const PostComposeNode& n) const {
      return n.h.max_value(child(n.child, side));
    }
    double operator()(const PreComposeNode& n) const {
      return child(n.child, n.h.max_value(side));
    }
    double operator()(const ComposeNode& n) const {
      return child(n.outer, child(n.inner, side));
    }
    double operator()(const HadamardNode& n) const {
      return child(n.first, side) * child(n.second, side);
    }
    double operator()(const NormalizeNode& n) const {
      return (child(n.child, side) + n.epsilon) / n.m1;
    }
  };
  return std::visit(Bounder{side, m, e}, e.node);
}

void check_domain(std::span<const double> x, int m) {
  if (static_cast<int>(x.size()) != m) fail(ErrorKind::dimension, "evaluate: wrong point dimension");
  double s = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::domain, "evaluate: non-finite coordinate");
    if (v < 0.0) fail(ErrorKind::domain, "evaluate: negative coordinate (outside B+)");
    s += v;
  }
  if (s > 1.0 + 1e-9) fail(ErrorKind::domain, "evaluate: l1 norm exceeds 1 (outside B+)");
}

void check_domain(std::span<const Real> x, int m) {
  if (static_cast<int>(x.size()) != m) fail(ErrorKind::dimension, "evaluate: wrong point dimension");
  Real s(0.0, x[0].prec());
  for (const Real& v : x) {
    if (!v.is_finite()) fail(ErrorKind::domain, "evaluate: non-finite coordinate");
    if (v.sign() < 0) fail(ErrorKind::domain, "evaluate: negative coordinate (outside B+)");
    s += v;
  }
  if (s > 1.0 + 1e-9) fail(ErrorKind::domain, "evaluate: l1 norm exceeds 1 (outside B+)");
}

// Deterministic positivity probe used by the hadamard constructor.
bool sampled_positive(const Expr& e, int m) {
  SampleRng rng(0x9E3779B97F4A7C15ull);
  std::vector<double> out;
  for (int i = 0; i < 256; ++i) {
    std::vector<double> x = (i % 2 == 0) ? rng.simplex_point(m) : rng.ball_point(m);
    eval_expr<double>(e, x, out);
    for (double v : out)
      if (!(v > 0.0)) return false;
  }
  return true;
}

int require_same_dim(const FitnessMap& a, const FitnessMap& b, const char* who) {
  if (a.dim() != b.dim()) fail(ErrorKind::dimension, std::string(who) + ": dimension mismatch");
  return a.dim();
}

json field_to_json(const ScalarField& f) {
  if (f.kind == ScalarField::Kind::constant) return json{{"kind", "const"}, {"value", f.value}};
  return json{{"kind", "sum_power"}, {"r", f.r}};
}

ScalarField field_from_json(const json& j) {
  std::string k = j.at("kind").get<std::string>();
  if (k == "const") return ScalarField::constant(j.at("value").get<double>());
  if (k == "sum_power") return ScalarField::sum_power(j.at("r").get<double>());
  fail(ErrorKind::config, "unknown scalar field kind '" + k + "'");
}

json spec_to_json(const ScalarFunctionSpec& f) {
  switch (f.kind()) {
    case ScalarFunctionSpec::Kind::power:
      return json{{"kind", "power"}, {"q", f.q()}, {"scale", f.scale()}};
    case ScalarFunctionSpec::Kind::exponential:
      return json{{"kind", "exponential"}, {"scale", f.scale()}};
    case ScalarFunctionSpec::Kind::tabulated: {
      json knots = json::array();
      for (auto& [t, v] : f.knots()) knots.push_back(json::array({t, v}));
      return json{{"kind", "tabulated"}, {"knots", knots}};
    }
  }
  return {};
}

ScalarFunctionSpec spec_from_json(const json& j) {
  std::string k = j.at("kind").get<std::string>();
  if (k == "power")
    return ScalarFunctionSpec::power(j.at("q").get<double>(), j.value("scale", 1.0));
  if (k == "exponential") return ScalarFunctionSpec::exponential(j.at("scale").get<double>());
  if (k == "tabulated") {
    std::vector<std::pair<double, double>> knots;
    for (auto& kv : j.at("knots")) knots.emplace_back(kv.at(0).get<double>(), kv.at(1).get<double>());
    return ScalarFunctionSpec::tabulated(std::move(knots));
  }
  fail(ErrorKind::config, "unknown scalar function kind '" + k + "'");
}

json expr_to_json(const Expr& e) {
  struct Writer {
    json operator()(const IdentityNode&) { return {{"kind", "identity"}}; }
    json operator()(const SwapFirstTwoNode&) { return {{"kind", "swap_first_two"}}; }
    json operator()(const CompleteSymmetricNode& n) {
      return {{"kind", "complete_symmetric"}, {"k", n.k}};
    }
    json operator()(const GaugeNode& n) { return {{"kind", "gauge"}, {"p", n.p}}; }
    json operator()(const GammaProductNode& n) { return {{"kind", "gamma_product"}, {"a", n.a}}; }
    json operator()(const SeparableNode& n) {
      return {{"kind", "separable"}, {"f", spec_to_json(n.f)}};
    }
    json operator()(const SymmetricCompositeNode& n) {
      return {{"kind", "symmetric_composite"}, {"k", n.k}, {"f", spec_to_json(n.f)}};
    }
    json operator()(const QuadraticSymmetricNode& n) {
      return {{"kind", "quadratic_symmetric"}, {"w1", n.w1}, {"w2", n.w2}};
    }
    json operator()(const CompositionNode& n) {
      return {{"kind", "composition"}, {"psi", expr_to_json(*n.psi)}, {"h", spec_to_json(n.h)}};
    }
    json operator()(const AffineShiftNode& n) {
      return {{"kind", "affine_shift"},
              {"child", expr_to_json(*n.child)},
              {"phi", field_to_json(n.phi)},
              {"psi", field_to_json(n.psi)}};
    }
    json operator()(const ConicCombinationNode& n) {
      return {{"kind", "conic_combination"},
              {"phi", field_to_json(n.phi)},
              {"first", expr_to_json(*n.first)},
              {"psi", field_to_json(n.psi)},
              {"second", expr_to_json(*n.second)}};
    }
    json operator()(const PostComposeNode& n) {
      return {{"kind", "post_compose"}, {"h", spec_to_json(n.h)}, {"child", expr_to_json(*n.child)}};
    }
    json operator()(const PreComposeNode& n) {
      return {{"kind", "pre_compose"}, {"child", expr_to_json(*n.child)}, {"h", spec_to_json(n.h)}};
    }
    json operator()(const ComposeNode& n) {
      return {{"kind", "compose"}, {"outer", expr_to_json(*n.outer)}, {"inner", expr_to_json(*n.inner)}};
    }
    json operator()(const HadamardNode& n) {
      return {{"kind", "hadamard"}, {"first", expr_to_json(*n.first)}, {"second", expr_to_json(*n.second)}};
    }
    json operator()(const NormalizeNode& n) {
      return {{"kind", "normalize"}, {"epsilon", n.epsilon}, {"child", expr_to_json(*n.child)}};
    }
  };
  return std::visit(Writer{}, e.node);
}

std::string expr_describe(const Expr& e) {
  struct D {
    std::string operator()(const IdentityNode&) { return "identity"; }
    std::string operator()(const SwapFirstTwoNode&) { return "swap_first_two"; }
    std::string operator()(const CompleteSymmetricNode& n) {
      return "complete_symmetric(k=" + std::to_string(n.k) + ")";
    }
    std::string operator()(const GaugeNode& n) { return "gauge(p=" + std::to_string(n.p) + ")"; }
    std::string operator()(const GammaProductNode& n) {
      return "gamma_product(a=" + std::to_string(n.a) + ")";
    }
    std::string operator()(const SeparableNode& n) { return "separable(" + n.f.describe() + ")"; }
    std::string operator()(const SymmetricCompositeNode& n) {
      return "symmetric_composite(k=" + std::to_string(n.k) + ", " + n.f.describe() + ")";
    }
    std::string operator()(const QuadraticSymmetricNode& n) {
      return "quadratic_symmetric(w1=" + std::to_string(n.w1) + ", w2=" + std::to_string(n.w2) + ")";
    }
    std::string operator()(const CompositionNode& n) {
      return "composition(" + expr_describe(*n.psi) + ", h=" + n.h.describe() + ")";
    }
    std::string operator()(const AffineShiftNode& n) {
      return "affine_shift(" + expr_describe(*n.child) + ")";
    }
    std::string operator()(const ConicCombinationNode& n) {
      return "conic(" + expr_describe(*n.first) + ", " + expr_describe(*n.second) + ")";
    }
    std::string operator()(const PostComposeNode& n) {
      return "post_compose(" + n.h.describe() + ", " + expr_describe(*n.child) + ")";
    }
    std::string operator()(const PreComposeNode& n) {
      return "pre_compose(" + expr_describe(*n.child) + ", " + n.h.describe() + ")";
    }
    std::string operator()(const ComposeNode& n) {
      return "compose(" + expr_describe(*n.outer) + ", " + expr_describe(*n.inner) + ")";
    }
    std::string operator()(const HadamardNode& n) {
      return "hadamard(" + expr_describe(*n.first) + ", " + expr_describe(*n.second) + ")";
    }
    std::string operator()(const NormalizeNode& n) {
      return "normalize(" + expr_describe(*n.child) + ", eps=" + std::to_string(n.epsilon) + ")";
    }
  };
  return std::visit(D{}, e.node);
}

Expr expr_from_json_impl(const json& j, int m);

ExprPtr child_from_json(const json& j, int m) {
  return std::make_shared<const Expr>(expr_from_json_impl(j, m));
}

Expr expr_from_json_impl(const json& j, int m) {
  std::string k = j.at("kind").get<std::string>();
  if (k == "identity") return Expr{IdentityNode{}};
  if (k == "swap_first_two") return Expr{SwapFirstTwoNode{}};
  if (k == "complete_symmetric") return Expr{CompleteSymmetricNode{j.at("k").get<int>()}};
  if (k == "gauge") return Expr{GaugeNode{j.at("p").get<double>()}};
  if (k == "gamma_product") return Expr{GammaProductNode{j.at("a").get<double>()}};
  if (k == "separable") return Expr{SeparableNode{spec_from_json(j.at("f"))}};
  if (k == "symmetric_composite")
    return Expr{SymmetricCompositeNode{j.at("k").get<int>(), spec_from_json(j.at("f"))}};
  if (k == "quadratic_symmetric")
    return Expr{QuadraticSymmetricNode{j.at("w1").get<double>(), j.at("w2").get<double>()}};
  if (k == "composition")
    return Expr{CompositionNode{child_from_json(j.at("psi"), m), spec_from_json(j.at("h"))}};
  if (k == "affine_shift")
    return Expr{AffineShiftNode{child_from_json(j.at("child"), m), field_from_json(j.at("phi")),
                                field_from_json(j.at("psi"))}};
  if (k == "conic_combination")
    return Expr{ConicCombinationNode{field_from_json(j.at("phi")), child_from_json(j.at("first"), m),
                                     field_from_json(j.at("psi")),
                                     child_from_json(j.at("second"), m)}};
  if (k == "post_compose")
    return Expr{PostComposeNode{spec_from_json(j.at("h")), child_from_json(j.at("child"), m)}};
  if (k == "pre_compose")
    return Expr{PreComposeNode{child_from_json(j.at("child"), m), spec_from_json(j.at("h"))}};
  if (k == "compose")
    return Expr{ComposeNode{child_from_json(j.at("outer"), m), child_from_json(j.at("inner"), m)}};
  if (k == "hadamard")
    return Expr{HadamardNode{child_from_json(j.at("first"), m), child_from_json(j.at("second"), m)}};
  if (k == "normalize") {
    // m1 is re-derived from the child's bound, not trusted from the document
    ExprPtr child = child_from_json(j.at("child"), m);
    double eps = j.at("epsilon").get<double>();
    if (!(eps > 0.0)) fail(ErrorKind::config, "normalize.epsilon must be > 0");
    double mbound = box_bound(*child, 1.0, m);
    return Expr{NormalizeNode{child, eps, std::max(mbound + eps, 1.0)}};
  }
  fail(ErrorKind::config, "unknown fitness node kind '" + k + "'");
}

// Potential of gradient nodes, for finite-difference oracles.
std::optional<double> potential_impl(const Expr& e, std::span<const double> x) {
  struct P {
    std::span<const double> x;
    int m() const { return static_cast<int>(x.size()); }

    std::optional<double> operator()(const IdentityNode&) {
      double s = 0.0;
      for (double v : x) s += v * v;
      return 0.5 * s;
    }
    std::optional<double> operator()(const SwapFirstTwoNode&) { return std::nullopt; }
    std::optional<double> operator()(const CompleteSymmetricNode& n) {
      return num::to_double(complete_h(x, n.k)[n.k]);
    }
    std::optional<double> operator()(const GaugeNode& n) {
      double s = 0.0;
      for (double v : x) s += std::pow(v, n.p);
      return std::pow(s, 1.0 / n.p);
    }
    std::optional<double> operator()(const GammaProductNode& n) {
      double p = 1.0;
      for (double v : x) p *= std::tgamma(v + n.a);
      return p;
    }
    std::optional<double> operator()(const SeparableNode& n) {
      double s = 0.0;
      for (double v : x) s += num::to_double(n.f.value(v));
      return s;
    }
    std::optional<double> operator()(const SymmetricCompositeNode& n) {
      std::vector<double> u(m());
      for (int i = 0; i < m(); ++i) u[i] = num::to_double(n.f.value(x[i]));
      return num::to_double(elementary_e(std::span<const double>(u), n.k)[n.k]);
    }
    std::optional<double> operator()(const QuadraticSymmetricNode& n) {
      double s = 0.0, s2 = 0.0;
      for (double v : x) {
        s += v;
        s2 += v * v;
      }
      return n.w1 * s2 + n.w2 * s * s;
    }
    std::optional<double> operator()(const CompositionNode& n) {
      std::vector<double> u(m());
      for (int i = 0; i < m(); ++i) u[i] = num::to_double(n.h.value(x[i]));
      return potential_impl(*n.psi, u);
    }
    std::optional<double> operator()(const AffineShiftNode& n) {
      if (n.phi.kind != ScalarField::Kind::constant || n.psi.kind != ScalarField::Kind::constant)
        return std::nullopt;
      auto c = potential_impl(*n.child, x);
      if (!c) return std::nullopt;
      double s = 0.0;
      for (double v : x) s += v;
      return n.phi.value * *c + n.psi.value * s;
    }
    std::optional<double> operator()(const ConicCombinationNode& n) {
      if (n.phi.kind != ScalarField::Kind::constant || n.psi.kind != ScalarField::Kind::constant)
        return std::nullopt;
      auto a = potential_impl(*n.first, x), b = potential_impl(*n.second, x);
      if (!a || !b) return std::nullopt;
      return n.phi.value * *a + n.psi.value * *b;
    }
    std::optional<double> operator()(const PostComposeNode&) { return std::nullopt; }
    std::optional<double> operator()(const PreComposeNode&) { return std::nullopt; }
    std::optional<double> operator()(const ComposeNode&) { return std::nullopt; }
    std::optional<double> operator()(const HadamardNode&) { return std::nullopt; }
    std::optional<double> operator()(const NormalizeNode& n) {
      auto c = potential_impl(*n.child, x);
      if (!c) return std::nullopt;
      double s = 0.0;
      for (double v : x) s += v;
      return (*c + n.epsilon * s) / n.m1;
    }
  };
  return std::visit(P{x}, e.node);
}

}  // namespace

FitnessMap::FitnessMap(ExprPtr root, int m, bool force_sampled_bound) : root_(std::move(root)), m_(m) {
  if (m_ < 2) fail(ErrorKind::dimension, "FitnessMap: need m >= 2");
  if (!root_) fail(ErrorKind::parameter, "FitnessMap: empty expression");
  if (force_sampled_bound) {
    SampleRng rng(0x5EEDF17Dull);
    std::vector<double> out;
    double hi = 0.0;
    for (int i = 0; i < 4096; ++i) {
      std::vector<double> x = rng.ball_point(m_);
      eval_expr<double>(*root_, x, out);
      for (double v : out) hi = std::max(hi, v);
    }
    bound_ = Bound{1.1 * hi, BoundKind::sampled};
  } else {
    bound_ = Bound{box_bound(*root_, 1.0, m_), BoundKind::analytic};
  }
  if (!std::isfinite(bound_.value))
    fail(ErrorKind::numeric, "FitnessMap: declared bound is not finite");
}

std::vector<double> FitnessMap::evaluate(std::span<const double> x) const {
  check_domain(x, m_);
  std::vector<double> out;
  eval_expr<double>(*root_, x, out);
  return out;
}

std::vector<Real> FitnessMap::evaluate(std::span<const Real> x) const {
  check_domain(x, m_);
  std::vector<Real> out;
  eval_expr<Real>(*root_, x, out);
  return out;
}

void FitnessMap::evaluate_into(std::span<const double> x, std::vector<double>& out) const {
  eval_expr<double>(*root_, x, out);
}

void FitnessMap::evaluate_into(std::span<const Real> x, std::vector<Real>& out) const {
  eval_expr<Real>(*root_, x, out);
}

FitnessMap FitnessMap::normalized(double epsilon) const {
  if (!(epsilon > 0.0)) fail(ErrorKind::parameter, "normalize: epsilon must be > 0");
  double m1 = std::max(bound_.value + epsilon, 1.0);
  auto node = std::make_shared<const Expr>(Expr{NormalizeNode{root_, epsilon, m1}});
  FitnessMap out(node, m_, bound_.kind == BoundKind::sampled);
  return out;
}

nlohmann::json FitnessMap::to_json() const {
  nlohmann::json j{{"m", m_}, {"expr", expr_to_json(*root_)}};
  if (bound_.kind == BoundKind::sampled) j["bound"] = {{"kind", "sampled"}};
  return j;
}

FitnessMap FitnessMap::from_json(const nlohmann::json& j) {
  int m = j.at("m").get<int>();
  if (m < 2) fail(ErrorKind::config, "fitness.m must be >= 2");
  bool sampled = j.contains("bound") && j["bound"].value("kind", "analytic") == "sampled";
  ExprPtr root = child_from_json(j.at("expr"), m);
  return FitnessMap(root, m, sampled);
}

std::string FitnessMap::describe() const { return expr_describe(*root_); }

FitnessMap identity_map(int m) {
  return FitnessMap(std::make_shared<const Expr>(Expr{IdentityNode{}}), m);
}

FitnessMap swap_first_two_map(int m) {
  return FitnessMap(std::make_shared<const Expr>(Expr{SwapFirstTwoNode{}}), m);
}

FitnessMap grad_complete_symmetric(int k, int m) {
  if (k < 1 || k > m) fail(ErrorKind::parameter, "grad_complete_symmetric: need 1 <= k <= m");
  return FitnessMap(std::make_shared<const Expr>(Expr{CompleteSymmetricNode{k}}), m);
}

FitnessMap grad_gauge(double p, int m) {
  if (!(p > 1.0)) fail(ErrorKind::parameter, "grad_gauge: need p > 1");
  return FitnessMap(std::make_shared<const Expr>(Expr{GaugeNode{p}}), m);
}

FitnessMap grad_gamma_product(double a, int m) {
  if (!(a >= 1.0)) fail(ErrorKind::parameter, "grad_gamma_product: need a >= 1");
  return FitnessMap(std::make_shared<const Expr>(Expr{GammaProductNode{a}}), m);
}

FitnessMap grad_separable(const ScalarFunctionSpec& f, int m) {
  if (!f.strictly_convex())
    fail(ErrorKind::parameter,
         "grad_separable: spec must be strictly convex (tabulated polylines are not)");
  return FitnessMap(std::make_shared<const Expr>(Expr{SeparableNode{f}}), m);
}

FitnessMap grad_symmetric_composite(int k, const ScalarFunctionSpec& f, int m) {
  if (k < 1 || k > m) fail(ErrorKind::parameter, "grad_symmetric_composite: need 1 <= k <= m");
  if (!f.strictly_log_convex_accepted())
    fail(ErrorKind::parameter, "grad_symmetric_composite: f must be the exponential kind");
  return FitnessMap(std::make_shared<const Expr>(Expr{SymmetricCompositeNode{k, f}}), m);
}

FitnessMap grad_quadratic_symmetric(double w1, double w2, int m) {
  if (!(w1 > 0.0) || w2 < 0.0)
    fail(ErrorKind::parameter, "grad_quadratic_symmetric: need w1 > 0 and w2 >= 0");
  return FitnessMap(std::make_shared<const Expr>(Expr{QuadraticSymmetricNode{w1, w2}}), m);
}

FitnessMap grad_composition(const FitnessMap& psi_gradient, const ScalarFunctionSpec& h) {
  if (!h.strictly_convex())
    fail(ErrorKind::parameter, "grad_composition: h must be strictly increasing and convex");
  if (!has_potential(psi_gradient))
    fail(ErrorKind::parameter, "grad_composition: psi must be a catalog gradient field");
  return FitnessMap(std::make_shared<const Expr>(Expr{CompositionNode{psi_gradient.root(), h}}),
                    psi_gradient.dim());
}

FitnessMap affine_shift(const FitnessMap& f, const ScalarField& phi, const ScalarField& psi) {
  return FitnessMap(std::make_shared<const Expr>(Expr{AffineShiftNode{f.root(), phi, psi}}),
                    f.dim());
}

FitnessMap conic_combination(const ScalarField& phi, const FitnessMap& f, const ScalarField& psi,
                             const FitnessMap& g) {
  int m = require_same_dim(f, g, "conic_combination");
  return FitnessMap(
      std::make_shared<const Expr>(Expr{ConicCombinationNode{phi, f.root(), psi, g.root()}}), m);
}

FitnessMap post_compose(const ScalarFunctionSpec& h, const FitnessMap& f) {
  return FitnessMap(std::make_shared<const Expr>(Expr{PostComposeNode{h, f.root()}}), f.dim());
}

FitnessMap pre_compose(const FitnessMap& f, const ScalarFunctionSpec& h) {
  return FitnessMap(std::make_shared<const Expr>(Expr{PreComposeNode{f.root(), h}}), f.dim());
}

FitnessMap compose(const FitnessMap& outer, const FitnessMap& inner) {
  int m = require_same_dim(outer, inner, "compose");
  return FitnessMap(std::make_shared<const Expr>(Expr{ComposeNode{outer.root(), inner.root()}}), m);
}

FitnessMap hadamard(const FitnessMap& f, const FitnessMap& g) {
  int m = require_same_dim(f, g, "hadamard");
  if (!sampled_positive(*f.root(), m) || !sampled_positive(*g.root(), m))
    fail(ErrorKind::parameter, "hadamard: factor maps must be strictly positive");
  return FitnessMap(std::make_shared<const Expr>(Expr{HadamardNode{f.root(), g.root()}}), m);
}

bool has_potential(const FitnessMap& map) {
  std::vector<double> probe(map.dim(), 1.0 / (2.0 * map.dim()));
  return potential_impl(map.expr(), probe).has_value();
}

double potential(const FitnessMap& map, std::span<const double> x) {
  auto v = potential_impl(map.expr(), x);
  if (!v) fail(ErrorKind::unsupported, "potential: map is not a catalog gradient field");
  return *v;
}

double digamma(double t) { return num::digamma(t); }

nlohmann::json SopReport::to_json() const {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& viol : violations) {
    v.push_back({{"point", viol.point},
                 {"i", viol.i},
                 {"j", viol.j},
                 {"xi", viol.xi},
                 {"xj", viol.xj},
                 {"fi", viol.fi},
                 {"fj", viol.fj},
                 {"domain", viol.domain}});
  }
  return {{"samples", samples},
          {"seed", seed},
          {"tol", tol},
          {"checked", checked},
          {"total_violations", total_violations},
          {"violations", v},
          {"pass", pass()}};
}

SopReport verify_sop(const FitnessMap& map, int samples, std::uint64_t seed, double tol) {
  if (samples < 1) fail(ErrorKind::parameter, "verify_sop: samples must be >= 1");
  SopReport report;
  report.samples = samples;
  report.seed = seed;
  report.tol = tol;
  SampleRng rng(seed);
  const int m = map.dim();
  std::vector<double> f;
  auto check_point = [&](const std::vector<double>& x, const char* domain) {
    map.evaluate_into(std::span<const double>(x), f);
    ++report.checked;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        if (num::sign3(x[i] - x[j], tol) != num::sign3(f[i] - f[j], tol)) {
          ++report.total_violations;
          if (report.violations.size() < 1000)
            report.violations.push_back(
                SopViolation{x, i + 1, j + 1, x[i], x[j], f[i], f[j], domain});
        }
      }
  };
  for (int s = 0; s < samples; ++s) check_point(rng.simplex_point(m), "simplex");
  for (int s = 0; s < samples; ++s) check_point(rng.ball_point(m), "ball");
  return report;
}

double bound_estimate(const FitnessMap& map, int grid) {
  if (grid < 2) fail(ErrorKind::parameter, "bound_estimate: grid must be >= 2");
  if (map.declared_bound().kind == BoundKind::analytic) return map.declared_bound().value;
  SampleRng rng(0xB0D0E57Dull);
  std::vector<double> out;
  double hi = 0.0;
  for (int i = 0; i < grid; ++i) {
    std::vector<double> x = rng.ball_point(map.dim());
    map.evaluate_into(std::span<const double>(x), out);
    for (double v : out) hi = std::max(hi, v);
  }
  return 1.1 * hi;
}

}  // namespace replidyn
