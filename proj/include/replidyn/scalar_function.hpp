#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "replidyn/error.hpp"
#include "replidyn/num.hpp"

namespace replidyn {

// Scalar function f: R+ -> R+ from the declarative catalog.
//   power:       f(t) = scale * t^q, q > 1, scale > 0   (strictly convex)
//   exponential: f(t) = exp(scale * t), scale > 0       (strictly convex)
//   tabulated:   monotone convex polyline through user knots; derivative is
//                piecewise constant, so it qualifies as strictly increasing
//                but only weakly convex (gradient constructors reject it).
class ScalarFunctionSpec {
 public:
  enum class Kind { power, exponential, tabulated };

  static ScalarFunctionSpec power(double q, double scale = 1.0) {
    if (!(q > 1.0)) fail(ErrorKind::parameter, "power spec: need q > 1");
    if (!(scale > 0.0)) fail(ErrorKind::parameter, "power spec: need scale > 0");
    ScalarFunctionSpec s;
    s.kind_ = Kind::power;
    s.q_ = q;
    s.scale_ = scale;
    return s;
  }

  static ScalarFunctionSpec exponential(double scale) {
    if (!(scale > 0.0)) fail(ErrorKind::parameter, "exponential spec: need scale > 0");
    ScalarFunctionSpec s;
    s.kind_ = Kind::exponential;
    s.scale_ = scale;
    return s;
  }

  static ScalarFunctionSpec tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) fail(ErrorKind::parameter, "tabulated spec: need >= 2 knots");
    if (knots.front().first != 0.0)
      fail(ErrorKind::parameter, "tabulated spec: first knot must be at t = 0");
    if (knots.front().second < 0.0)
      fail(ErrorKind::parameter, "tabulated spec: values must be nonnegative");
    double prev_slope = -1.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
      double dt = knots[i].first - knots[i - 1].first;
      double dv = knots[i].second - knots[i - 1].second;
      if (dt <= 0.0) fail(ErrorKind::parameter, "tabulated spec: knot abscissae must increase");
      if (dv <= 0.0) fail(ErrorKind::parameter, "tabulated spec: values must strictly increase");
      double slope = dv / dt;
      if (slope + 1e-15 < prev_slope)
        fail(ErrorKind::parameter, "tabulated spec: slopes must be nondecreasing (convexity)");
      prev_slope = slope;
    }
    ScalarFunctionSpec s;
    s.kind_ = Kind::tabulated;
    s.knots_ = std::move(knots);
    return s;
  }

  Kind kind() const { return kind_; }
  double q() const { return q_; }
  double scale() const { return scale_; }
  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

  bool strictly_convex() const { return kind_ != Kind::tabulated; }
  bool strictly_log_convex_accepted() const { return kind_ == Kind::exponential; }

  template <class T>
  T value(const T& t) const {
    using std::exp;
    using std::pow;
    switch (kind_) {
      case Kind::power:
        return num::make_like(scale_, t) * pow(t, num::make_like(q_, t));
      case Kind::exponential:
        return exp(num::make_like(scale_, t) * t);
      case Kind::tabulated: {
        auto [t0, v0, slope] = segment(num::to_double(t));
        return num::make_like(v0, t) + num::make_like(slope, t) * (t - num::make_like(t0, t));
      }
    }
    return num::make_like(0.0, t);
  }

  template <class T>
  T derivative(const T& t) const {
    using std::exp;
    using std::pow;
    switch (kind_) {
      case Kind::power:
        return num::make_like(scale_ * q_, t) * pow(t, num::make_like(q_ - 1.0, t));
      case Kind::exponential:
        return num::make_like(scale_, t) * exp(num::make_like(scale_, t) * t);
      case Kind::tabulated: {
        auto [t0, v0, slope] = segment(num::to_double(t));
        (void)t0;
        (void)v0;
        return num::make_like(slope, t);
      }
    }
    return num::make_like(0.0, t);
  }

  // Upper bounds over [0, c]; both f and f' are nondecreasing on R+.
  double max_value(double c) const { return num::to_double(value(c)); }
  double max_derivative(double c) const { return num::to_double(derivative(c)); }

  std::string describe() const {
    switch (kind_) {
      case Kind::power:
        return "power(q=" + std::to_string(q_) + ", scale=" + std::to_string(scale_) + ")";
      case Kind::exponential:
        return "exponential(scale=" + std::to_string(scale_) + ")";
      case Kind::tabulated:
        return "tabulated(" + std::to_string(knots_.size()) + " knots)";
    }
    return "?";
  }

 private:
  ScalarFunctionSpec() = default;

  // Segment (t0, v0, slope) covering t; linear extrapolation past the ends.
  std::tuple<double, double, double> segment(double t) const {
    std::size_t i = 1;
    while (i + 1 < knots_.size() && knots_[i].first < t) ++i;
    double t0 = knots_[i - 1].first, v0 = knots_[i - 1].second;
    double slope = (knots_[i].second - v0) / (knots_[i].first - t0);
    return {t0, v0, slope};
  }

  Kind kind_ = Kind::power;
  double q_ = 2.0;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> knots_;
};

}  // namespace replidyn
