#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace replidyn {

// Deterministic sampler. Distributions are implemented by hand on top of the
// raw engine so that identical seeds give identical streams on every
// platform/compiler (std:: distributions are implementation-defined).
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double uniform_pos() { return 1.0 - uniform01(); }

  // Uniform point of the standard simplex via exponential spacings.
  std::vector<double> simplex_point(int m) {
    std::vector<double> x(m);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
      x[i] = -std::log(uniform_pos());
      s += x[i];
    }
    if (s <= 0.0) {  // all spacings zero: vanishing probability, fall back to center
      for (int i = 0; i < m; ++i) x[i] = 1.0 / m;
      return x;
    }
    for (int i = 0; i < m; ++i) x[i] /= s;
    return x;
  }

  // Uniform point of B+ = {x >= 0, |x|_1 <= 1}: simplex direction scaled by U^(1/m).
  std::vector<double> ball_point(int m) {
    std::vector<double> x = simplex_point(m);
    double r = std::pow(uniform_pos(), 1.0 / m);
    for (double& v : x) v *= r;
    return x;
  }

  // Simplex point conditioned on all coordinates >= floor (rejection).
  std::vector<double> interior_simplex_point(int m, double floor = 1e-6) {
    for (;;) {
      std::vector<double> x = simplex_point(m);
      bool ok = true;
      for (double v : x) ok = ok && v >= floor;
      if (ok) return x;
    }
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace replidyn
