#include <cmath>

#include "replidyn/error.hpp"
#include "replidyn/num.hpp"

namespace replidyn::num {

// psi(t) by upward recurrence psi(t) = psi(t+1) - 1/t until t >= 8, then the
// asymptotic expansion ln t - 1/(2t) - sum B_2n / (2n t^2n) with six Bernoulli
// terms. Worst-case truncation at t = 8 is ~2e-14 absolute.
double digamma(double t) {
  if (!(t > 0.0)) fail(ErrorKind::domain, "digamma: need t > 0");
  double acc = 0.0;
  while (t < 8.0) {
    acc -= 1.0 / t;
    t += 1.0;
  }
  const double inv = 1.0 / t;
  const double inv2 = inv * inv;
  // B_2/2, B_4/4, B_6/6, B_8/8, B_10/10, B_12/12
  static const double c[6] = {1.0 / 12.0,  -1.0 / 120.0, 1.0 / 252.0,
                              -1.0 / 240.0, 1.0 / 132.0,  -691.0 / 32760.0};
  double tail = 0.0;
  double p = inv2;
  for (double coeff : c) {
    tail += coeff * p;
    p *= inv2;
  }
  return acc + std::log(t) - 0.5 * inv - tail;
}

}  // namespace replidyn::num
