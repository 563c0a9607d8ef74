#pragma once

#include <complex>
#include <optional>
#include <string>

#include <gmpxx.h>

namespace clpaths {

/// Exact element of Q(i), used as an oracle scalar for rank computations.
class GaussRational {
 public:
  GaussRational() = default;
  GaussRational(long v) : re_(v), im_(0) {}  // NOLINT(google-explicit-constructor)
  GaussRational(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im)) {
    re_.canonicalize();
    im_.canonicalize();
  }

  const mpq_class& re() const { return re_; }
  const mpq_class& im() const { return im_; }
  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }

  GaussRational& operator+=(const GaussRational& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  GaussRational& operator-=(const GaussRational& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  GaussRational& operator*=(const GaussRational& o) {
    mpq_class r = re_ * o.re_ - im_ * o.im_;
    mpq_class i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  GaussRational& operator/=(const GaussRational& o) {
    const mpq_class den = o.re_ * o.re_ + o.im_ * o.im_;
    mpq_class r = (re_ * o.re_ + im_ * o.im_) / den;
    mpq_class i = (im_ * o.re_ - re_ * o.im_) / den;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  friend GaussRational operator+(GaussRational a, const GaussRational& b) { return a += b; }
  friend GaussRational operator-(GaussRational a, const GaussRational& b) { return a -= b; }
  friend GaussRational operator*(GaussRational a, const GaussRational& b) { return a *= b; }
  friend GaussRational operator/(GaussRational a, const GaussRational& b) { return a /= b; }
  friend GaussRational operator-(const GaussRational& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const GaussRational& a, const GaussRational& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  std::complex<double> to_complex() const { return {re_.get_d(), im_.get_d()}; }
  std::string str() const { return re_.get_str() + (sgn(im_) < 0 ? "" : "+") + im_.get_str() + "i"; }

 private:
  mpq_class re_{0};
  mpq_class im_{0};
};

/// Rational p/q with q <= max_den within tol of x, by continued fractions.
std::optional<mpq_class> rational_approximation(double x, long max_den = 1000000, double tol = 1e-15);

/// Gaussian-rational approximation of z, if both parts have one.
std::optional<GaussRational> gauss_rational(std::complex<double> z, long max_den = 1000000, double tol = 1e-15);

}  // namespace clpaths
