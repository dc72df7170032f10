#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hf {

using Rat = boost::multiprecision::cpp_rational;
using Cx = std::complex<double>;

/// Gaussian rational a + b*i.
struct GaussRat {
  Rat re{0};
  Rat im{0};

  GaussRat() = default;
  GaussRat(Rat r, Rat i = 0) : re(std::move(r)), im(std::move(i)) {}
  GaussRat(long r) : re(r) {}

  bool is_zero() const { return re == 0 && im == 0; }

  GaussRat operator+(const GaussRat& o) const { return {re + o.re, im + o.im}; }
  GaussRat operator-(const GaussRat& o) const { return {re - o.re, im - o.im}; }
  GaussRat operator-() const { return {-re, -im}; }
  GaussRat operator*(const GaussRat& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  bool operator==(const GaussRat& o) const { return re == o.re && im == o.im; }

  GaussRat inv() const {
    Rat n = re * re + im * im;
    if (n == 0) throw std::domain_error("GaussRat: division by zero");
    return {re / n, -im / n};
  }

  Cx to_complex() const { return {static_cast<double>(re), static_cast<double>(im)}; }
};

inline GaussRat gr_i() { return {0, 1}; }

/// Exact coefficient: a Laurent polynomial in pi with Gaussian-rational
/// coefficients.  pi is kept as a formal unit so that operations like the
/// z-derivative (which introduces factors of 2*pi*i) stay exact.
class Exact {
 public:
  Exact() = default;
  Exact(long n) {
    if (n != 0) terms_[0] = GaussRat(n);
  }
  explicit Exact(GaussRat g, int pi_pow = 0) {
    if (!g.is_zero()) terms_[pi_pow] = std::move(g);
  }

  static Exact from_ratio(long p, long q) {
    if (q == 0) throw std::domain_error("Exact: zero denominator");
    if (q < 0) {  // cpp_rational requires a positive denominator
      p = -p;
      q = -q;
    }
    return Exact(GaussRat(Rat(p, q)));
  }
  static Exact i() { return Exact(gr_i()); }
  static Exact pi(int pow = 1) { return Exact(GaussRat(1), pow); }

  bool is_zero() const { return terms_.empty(); }

  Exact operator+(const Exact& o) const {
    Exact r = *this;
    for (const auto& [p, g] : o.terms_) {
      auto it = r.terms_.find(p);
      if (it == r.terms_.end()) {
        r.terms_[p] = g;
      } else {
        it->second = it->second + g;
        if (it->second.is_zero()) r.terms_.erase(it);
      }
    }
    return r;
  }
  Exact operator-() const {
    Exact r;
    for (const auto& [p, g] : terms_) r.terms_[p] = -g;
    return r;
  }
  Exact operator-(const Exact& o) const { return *this + (-o); }
  Exact operator*(const Exact& o) const {
    Exact r;
    for (const auto& [p1, g1] : terms_)
      for (const auto& [p2, g2] : o.terms_) {
        GaussRat g = g1 * g2;
        if (g.is_zero()) continue;
        auto it = r.terms_.find(p1 + p2);
        if (it == r.terms_.end()) {
          r.terms_[p1 + p2] = g;
        } else {
          it->second = it->second + g;
          if (it->second.is_zero()) r.terms_.erase(it);
        }
      }
    return r;
  }
  bool operator==(const Exact& o) const { return terms_ == o.terms_; }

  /// Invertible exactly when the value is a single pi-power times a unit.
  Exact inv() const {
    if (terms_.size() != 1)
      throw std::domain_error("Exact: only monomials in pi are invertible");
    const auto& [p, g] = *terms_.begin();
    return Exact(g.inv(), -p);
  }

  Cx to_complex() const {
    Cx s = 0;
    for (const auto& [p, g] : terms_)
      s += g.to_complex() * std::pow(std::numbers::pi, p);
    return s;
  }

  const std::map<int, GaussRat>& terms() const { return terms_; }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [p, g] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << g.re;
      if (g.im != 0) os << (g.im > 0 ? "+" : "") << g.im << "i";
      os << ")";
      if (p != 0) os << "*pi^" << p;
    }
    return os.str();
  }

 private:
  std::map<int, GaussRat> terms_;  // pi power -> coefficient
};

// ---------------------------------------------------------------------------
// Ring traits shared by Exact and complex<double> coefficients.

template <class R>
struct ring;

template <>
struct ring<Exact> {
  static Exact zero() { return Exact(); }
  static Exact one() { return Exact(1); }
  static Exact from_int(long n) { return Exact(n); }
  static Exact from_ratio(long p, long q) { return Exact::from_ratio(p, q); }
  static bool is_zero(const Exact& x) { return x.is_zero(); }
  static bool eq(const Exact& a, const Exact& b) { return a == b; }
  static Exact inv(const Exact& x) { return x.inv(); }
  static Cx to_complex(const Exact& x) { return x.to_complex(); }
  /// The scalar -2*pi*i * (y2/2) = -pi*i*y2 used by the z-derivative.
  static Exact dz_factor(int y2) { return Exact(GaussRat(0, -y2), 1); }
  static Exact minus_2pii() { return Exact(GaussRat(0, -2), 1); }
  static Exact minus_i_over_2pi() { return Exact(GaussRat(0, Rat(-1, 2)), -1); }
  static Exact imag_unit() { return Exact::i(); }
};

template <>
struct ring<Cx> {
  static Cx zero() { return {0.0, 0.0}; }
  static Cx one() { return {1.0, 0.0}; }
  static Cx from_int(long n) { return {static_cast<double>(n), 0.0}; }
  static Cx from_ratio(long p, long q) {
    return {static_cast<double>(p) / static_cast<double>(q), 0.0};
  }
  static bool is_zero(const Cx& x) { return x == Cx{0.0, 0.0}; }
  static bool eq(const Cx& a, const Cx& b) { return a == b; }
  static Cx inv(const Cx& x) {
    if (x == Cx{0.0, 0.0}) throw std::domain_error("complex division by zero");
    return 1.0 / x;
  }
  static Cx to_complex(const Cx& x) { return x; }
  static Cx dz_factor(int y2) { return Cx{0.0, -std::numbers::pi * y2}; }
  static Cx minus_2pii() { return Cx{0.0, -2.0 * std::numbers::pi}; }
  static Cx minus_i_over_2pi() { return Cx{0.0, -0.5 / std::numbers::pi}; }
  static Cx imag_unit() { return Cx{0.0, 1.0}; }
};

}  // namespace hf
