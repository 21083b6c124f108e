#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "replidyn/error.hpp"
#include "replidyn/num.hpp"

namespace replidyn {

// A nonempty subset alpha of {1,...,m} (1-based, kept sorted).
struct Face {
  std::vector<int> indices;
  int m = 0;

  Face(std::vector<int> idx, int ambient) : indices(std::move(idx)), m(ambient) {
    if (m < 2) fail(ErrorKind::dimension, "Face: ambient dimension must be >= 2");
    if (indices.empty()) fail(ErrorKind::parameter, "Face: index set must be nonempty");
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    if (indices.front() < 1 || indices.back() > m)
      fail(ErrorKind::parameter, "Face: indices must lie in {1,...,m}");
  }

  int size() const { return static_cast<int>(indices.size()); }
  bool contains(int k) const { return std::binary_search(indices.begin(), indices.end(), k); }

  static Face full(int m) {
    std::vector<int> all(m);
    for (int i = 0; i < m; ++i) all[i] = i + 1;
    return Face(std::move(all), m);
  }
};

// Point of the standard simplex at a given arithmetic precision.
// Construction rescales by the coordinate sum when it is within 1e-6 of 1
// and rejects otherwise; silently fixing larger violations would mask
// dynamics bugs upstream.
template <class T>
class SimplexPoint {
 public:
  static constexpr double kSumSlack = 1e-6;

  static SimplexPoint from_coords(std::vector<T> coords, int precision_bits) {
    if (coords.size() < 2) fail(ErrorKind::dimension, "SimplexPoint: need m >= 2 coordinates");
    T zero = num::make_like(0.0, coords[0]);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (!num::finite(coords[i])) fail(ErrorKind::numeric, "SimplexPoint: non-finite coordinate");
      if (coords[i] < zero)
        fail(ErrorKind::domain, "SimplexPoint: negative coordinate at index " + std::to_string(i + 1));
    }
    T s = num::sum(std::span<const T>(coords));
    double sd = num::to_double(s);
    if (sd < 1.0 - kSumSlack || sd > 1.0 + kSumSlack)
      fail(ErrorKind::domain, "SimplexPoint: coordinate sum " + std::to_string(sd) +
                                  " not within 1e-6 of 1");
    for (T& c : coords) c /= s;
    return SimplexPoint(std::move(coords), precision_bits);
  }

  const std::vector<T>& coords() const { return coords_; }
  std::span<const T> span() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  int precision_bits() const { return precision_bits_; }

  // 1-based support/null index sets (exact zero test).
  std::vector<int> support() const {
    std::vector<int> s;
    T zero = num::make_like(0.0, coords_[0]);
    for (int i = 0; i < dim(); ++i)
      if (coords_[i] > zero) s.push_back(i + 1);
    return s;
  }

 private:
  SimplexPoint(std::vector<T> coords, int precision_bits)
      : coords_(std::move(coords)), precision_bits_(precision_bits) {}

  std::vector<T> coords_;
  int precision_bits_;
};

using SimplexPointD = SimplexPoint<double>;

// Pairwise comparison pattern of a coordinate vector: sign(x_i - x_j) for
// i < j, with |difference| <= tol counting as a tie.
struct OrderPattern {
  int m = 0;
  std::vector<std::int8_t> signs;  // row-major upper triangle, m*(m-1)/2 entries

  template <class T>
  static OrderPattern of(std::span<const T> x, double tol) {
    OrderPattern p;
    p.m = static_cast<int>(x.size());
    p.signs.reserve(static_cast<std::size_t>(p.m) * (p.m - 1) / 2);
    for (int i = 0; i < p.m; ++i)
      for (int j = i + 1; j < p.m; ++j)
        p.signs.push_back(static_cast<std::int8_t>(num::sign3_diff(x[i], x[j], tol)));
    return p;
  }

  friend bool operator==(const OrderPattern& a, const OrderPattern& b) {
    return a.m == b.m && a.signs == b.signs;
  }
};

// x ~ y: identical pairwise comparison pattern, ties decided by tol.
template <class T>
bool similar_order_equal(std::span<const T> x, std::span<const T> y, double tol) {
  if (x.size() != y.size()) fail(ErrorKind::dimension, "similar_order_equal: length mismatch");
  if (x.size() < 2) fail(ErrorKind::dimension, "similar_order_equal: need m >= 2");
  if (tol < 0) fail(ErrorKind::parameter, "similar_order_equal: tol must be >= 0");
  const int m = static_cast<int>(x.size());
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      if (num::sign3_diff(x[i], x[j], tol) != num::sign3_diff(y[i], y[j], tol)) return false;
  return true;
}

inline bool similar_order_equal(const std::vector<double>& x, const std::vector<double>& y,
                                double tol) {
  return similar_order_equal(std::span<const double>(x), std::span<const double>(y), tol);
}

// Center c_alpha: value 1/|alpha| on alpha, 0 elsewhere.
inline SimplexPointD face_center(const Face& face) {
  std::vector<double> c(face.m, 0.0);
  for (int k : face.indices) c[k - 1] = 1.0 / face.size();
  return SimplexPointD::from_coords(std::move(c), 53);
}

template <class T>
std::vector<T> face_center_coords(const Face& face, const T& like) {
  std::vector<T> c(face.m, num::make_like(0.0, like));
  T v = num::make_like(1.0, like) / num::make_like(static_cast<double>(face.size()), like);
  for (int k : face.indices) c[k - 1] = v;
  return c;
}

// Indices of alpha attaining the maximum coordinate over alpha, within tol.
// Requires supp(x) inside alpha.
template <class T>
std::vector<int> max_ind(std::span<const T> x, const Face& face, double tol) {
  if (static_cast<int>(x.size()) != face.m)
    fail(ErrorKind::dimension, "max_ind: point/face dimension mismatch");
  T zero = num::make_like(0.0, x[0]);
  for (int i = 0; i < face.m; ++i)
    if (x[i] > zero && !face.contains(i + 1))
      fail(ErrorKind::domain, "max_ind: support of x is not inside the face");
  int best = face.indices.front();
  for (int k : face.indices)
    if (x[k - 1] > x[best - 1]) best = k;
  std::vector<int> out;
  for (int k : face.indices)
    if (num::sign3_diff(x[best - 1], x[k - 1], tol) <= 0) out.push_back(k);
  return out;
}

template <class T>
std::vector<int> max_ind(const SimplexPoint<T>& x, const Face& face, double tol) {
  return max_ind(x.span(), face, tol);
}

// x majorizes y: descending partial sums of x dominate those of y (slack tol)
// with totals agreeing within tol.
template <class T>
bool majorizes(std::span<const T> x, std::span<const T> y, double tol) {
  if (x.size() != y.size()) fail(ErrorKind::dimension, "majorizes: length mismatch");
  const int m = static_cast<int>(x.size());
  std::vector<T> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::sort(xs.begin(), xs.end(), [](const T& a, const T& b) { return a > b; });
  std::sort(ys.begin(), ys.end(), [](const T& a, const T& b) { return a > b; });
  T px = num::make_like(0.0, x[0]), py = px;
  for (int k = 0; k < m - 1; ++k) {
    px += xs[k];
    py += ys[k];
    if (num::sign3_diff(px, py, tol) < 0) return false;
  }
  px += xs[m - 1];
  py += ys[m - 1];
  return num::sign3_diff(px, py, tol) == 0;
}

inline bool majorizes(const std::vector<double>& x, const std::vector<double>& y, double tol) {
  return majorizes(std::span<const double>(x), std::span<const double>(y), tol);
}

}  // namespace replidyn
