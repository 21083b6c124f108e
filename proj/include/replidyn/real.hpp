#pragma once

#include <mpfr.h>

#include <cstdint>
#include <string>
#include <utility>

namespace replidyn {

// Software big-float with runtime precision, backed by MPFR. Value semantics:
// copies are deep, binary operations produce a result at the wider operand
// precision, comparisons are exact. The exponent range is widened to the
// platform maximum on first use so that orbit coordinates can decay to
// magnitudes like 2^(-10^7) without flushing to zero.
class Real {
 public:
  static constexpr int kMinPrec = 2;

  Real() : Real(53) {}

  explicit Real(int prec) { mpfr_init2(v_, clamp_prec(prec)); mpfr_set_zero(v_, 1); }

  Real(double x, int prec) {
    mpfr_init2(v_, clamp_prec(prec));
    mpfr_set_d(v_, x, MPFR_RNDN);
  }

  Real(const std::string& s, int prec) {
    mpfr_init2(v_, clamp_prec(prec));
    mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN);
  }

  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }

  Real(Real&& o) noexcept {
    mpfr_init2(v_, kMinPrec);
    mpfr_swap(v_, o.v_);
  }

  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }

  Real& operator=(Real&& o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }

  ~Real() { mpfr_clear(v_); }

  int prec() const { return static_cast<int>(mpfr_get_prec(v_)); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  // Binary exponent of the leading bit; 0 for zero values.
  long exponent() const { return is_zero() ? 0 : static_cast<long>(mpfr_get_exp(v_)); }

  std::string to_string(int significant_digits) const {
    char* raw = nullptr;
    mpfr_asprintf(&raw, "%.*Rg", significant_digits, v_);
    std::string out(raw);
    mpfr_free_str(raw);
    return out;
  }

  friend Real operator+(const Real& a, const Real& b) { return bin(mpfr_add, a, b); }
  friend Real operator-(const Real& a, const Real& b) { return bin(mpfr_sub, a, b); }
  friend Real operator*(const Real& a, const Real& b) { return bin(mpfr_mul, a, b); }
  friend Real operator/(const Real& a, const Real& b) { return bin(mpfr_div, a, b); }

  friend Real operator+(const Real& a, double b) { return bin_d(mpfr_add_d, a, b); }
  friend Real operator-(const Real& a, double b) { return bin_d(mpfr_sub_d, a, b); }
  friend Real operator*(const Real& a, double b) { return bin_d(mpfr_mul_d, a, b); }
  friend Real operator/(const Real& a, double b) { return bin_d(mpfr_div_d, a, b); }
  friend Real operator+(double a, const Real& b) { return b + a; }
  friend Real operator*(double a, const Real& b) { return b * a; }
  friend Real operator-(double a, const Real& b) {
    Real r(b.prec());
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }
  friend Real operator/(double a, const Real& b) {
    Real r(b.prec());
    mpfr_d_div(r.v_, a, b.v_, MPFR_RNDN);
    return r;
  }

  Real operator-() const {
    Real r(prec());
    mpfr_neg(r.v_, v_, MPFR_RNDN);
    return r;
  }

  Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  Real& operator/=(const Real& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

  friend int cmp(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_); }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_); }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_); }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_); }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_); }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_); }
  friend bool operator!=(const Real& a, const Real& b) { return !mpfr_equal_p(a.v_, b.v_); }
  friend bool operator<(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) < 0; }
  friend bool operator>(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) > 0; }
  friend bool operator<=(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) <= 0; }
  friend bool operator>=(const Real& a, double b) { return mpfr_cmp_d(a.v_, b) >= 0; }

  friend Real abs(const Real& a) { return un(mpfr_abs, a); }
  friend Real sqrt(const Real& a) { return un(mpfr_sqrt, a); }
  friend Real exp(const Real& a) { return un(mpfr_exp, a); }
  friend Real log(const Real& a) { return un(mpfr_log, a); }
  friend Real log2(const Real& a) { return un(mpfr_log2, a); }
  friend Real tgamma(const Real& a) { return un(mpfr_gamma, a); }
  friend Real digamma(const Real& a) { return un(mpfr_digamma, a); }
  friend Real pow(const Real& a, const Real& b) { return bin(mpfr_pow, a, b); }
  friend Real pow(const Real& a, double b) { return pow(a, Real(b, a.prec())); }

  friend Real max(const Real& a, const Real& b) { return a >= b ? a : b; }
  friend Real min(const Real& a, const Real& b) { return a <= b ? a : b; }

  friend void swap(Real& a, Real& b) noexcept { mpfr_swap(a.v_, b.v_); }

  // Widens the MPFR exponent range to the platform maximum. Called once by
  // library entry points; idempotent and cheap.
  static void ensure_wide_exponent_range() {
    static const bool done = [] {
      mpfr_set_emin(mpfr_get_emin_min());
      mpfr_set_emax(mpfr_get_emax_max());
      return true;
    }();
    (void)done;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

 private:
  using BinFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
  using BinDFn = int (*)(mpfr_ptr, mpfr_srcptr, double, mpfr_rnd_t);
  using UnFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

  static int clamp_prec(int prec) { return prec < kMinPrec ? kMinPrec : prec; }

  static Real bin(BinFn fn, const Real& a, const Real& b) {
    Real r(a.prec() >= b.prec() ? a.prec() : b.prec());
    fn(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
  }
  static Real bin_d(BinDFn fn, const Real& a, double b) {
    Real r(a.prec());
    fn(r.v_, a.v_, b, MPFR_RNDN);
    return r;
  }
  static Real un(UnFn fn, const Real& a) {
    Real r(a.prec());
    fn(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

  mpfr_t v_;
};

}  // namespace replidyn
