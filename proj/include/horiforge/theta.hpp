#pragma once

#include <mutex>
#include <string>

#include "horiforge/qyseries.hpp"

namespace hf {

enum class ThetaKind { Theta, Theta1, Theta2, Theta3 };

struct InvalidShiftError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct SamplingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const char* theta_name(ThetaKind k) {
  switch (k) {
    case ThetaKind::Theta: return "theta";
    case ThetaKind::Theta1: return "theta1";
    case ThetaKind::Theta2: return "theta2";
    case ThetaKind::Theta3: return "theta3";
  }
  return "?";
}

namespace detail {
// factor sign: -1 for theta/theta2, +1 for theta1/theta3
inline int theta_sign(ThetaKind k) {
  return (k == ThetaKind::Theta || k == ThetaKind::Theta2) ? -1 : 1;
}
// q-offset of the j-th y factor, in eighths: 8j or 8j-4
inline int theta_offset8(ThetaKind k, int j) {
  return (k == ThetaKind::Theta || k == ThetaKind::Theta1) ? 8 * j : 8 * j - 4;
}
inline bool has_prefactor(ThetaKind k) {
  return k == ThetaKind::Theta || k == ThetaKind::Theta1;
}
}  // namespace detail

/// q,y-expansion of the Jacobi theta products with e^{2 pi i v} = y^{-1}.
/// Keeping factors with q-offset within the truncation order is exact.
template <class R>
QYSeries<R> theta_series(ThetaKind kind, int q_order8, int y_min2, int y_max2) {
  if (q_order8 < 8) throw std::invalid_argument("theta_series: need N_q >= 1");
  QYSeries<R> s(q_order8, y_min2, y_max2);
  if (detail::has_prefactor(kind)) {
    // 2 q^{1/8} sin(pi v) = -i q^{1/8}(y^{-1/2} - y^{1/2});
    // 2 q^{1/8} cos(pi v) =    q^{1/8}(y^{-1/2} + y^{1/2})
    R lo = kind == ThetaKind::Theta ? static_cast<R>(-ring<R>::imag_unit())
                                    : ring<R>::one();
    R hi = kind == ThetaKind::Theta ? ring<R>::imag_unit() : ring<R>::one();
    s.set(1, -1, lo);
    s.set(1, 1, hi);
  } else {
    s.set(0, 0, ring<R>::one());
  }
  const R sgn = ring<R>::from_int(detail::theta_sign(kind));
  for (int j = 1; 8 * j - 4 <= q_order8; ++j) {
    if (8 * j <= q_order8) {
      QYSeries<R> euler(q_order8, y_min2, y_max2);  // (1 - q^j)
      euler.set(0, 0, ring<R>::one());
      euler.set(8 * j, 0, ring<R>::from_int(-1));
      s = series_mul(s, euler);
    }
    int off = detail::theta_offset8(kind, j);
    if (off > q_order8) continue;
    QYSeries<R> fy(q_order8, y_min2, y_max2);  // (1 +- q^{off} y^{-1})(1 +- q^{off} y)
    fy.set(0, 0, ring<R>::one());
    fy.set(off, -2, sgn);
    s = series_mul(s, fy);
    QYSeries<R> fy2(q_order8, y_min2, y_max2);
    fy2.set(0, 0, ring<R>::one());
    fy2.set(off, 2, sgn);
    s = series_mul(s, fy2);
  }
  return s;
}

/// Direct evaluation of the finite product at a point of C x H.
inline Cx theta_numeric(ThetaKind kind, Cx v, Cx tau, int n_factors = 40) {
  if (tau.imag() <= 0) throw SamplingError("theta_numeric: Im tau must be > 0");
  if (n_factors < 1) throw SamplingError("theta_numeric: need n_factors >= 1");
  const Cx two_pi_i{0.0, 2.0 * std::numbers::pi};
  const Cx yinv = std::exp(two_pi_i * v);  // e^{2 pi i v} = y^{-1}
  const Cx y = 1.0 / yinv;
  const double sgn = detail::theta_sign(kind);

  Cx p;
  if (detail::has_prefactor(kind)) {
    Cx pre = kind == ThetaKind::Theta ? std::sin(std::numbers::pi * v)
                                      : std::cos(std::numbers::pi * v);
    p = 2.0 * std::exp(two_pi_i * tau / 8.0) * pre;
  } else {
    p = 1.0;
  }
  for (int j = 1; j <= n_factors; ++j) {
    // exponentials taken in tau, not via pow(q, .): half-integer powers of q
    // must track the branch q^{1/2} = e^{pi i tau}
    Cx qj = std::exp(two_pi_i * tau * static_cast<double>(j));
    Cx qoff = detail::has_prefactor(kind) ? qj : std::exp(two_pi_i * tau * (j - 0.5));
    p *= (1.0 - qj) * (1.0 + sgn * qoff * yinv) * (1.0 + sgn * qoff * y);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Cached numeric series: the production path for theta' at a point is the
// z-derivative of a generously truncated series, never finite differencing.

namespace detail {

struct ThetaCacheKey {
  ThetaKind kind;
  int q_order8, y_min2, y_max2;
  auto operator<=>(const ThetaCacheKey&) const = default;
};

inline const QYSeries<Cx>& cached_theta_series(ThetaKind kind, int q_order8,
                                               int y_min2, int y_max2) {
  static std::map<ThetaCacheKey, QYSeries<Cx>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  ThetaCacheKey key{kind, q_order8, y_min2, y_max2};
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, theta_series<Cx>(kind, q_order8, y_min2, y_max2)).first;
  return it->second;
}

// Generous truncation for pointwise work: terms of the theta products beyond
// q^32 are far below double precision on the sampling region.
constexpr int kNumericQOrder8 = 32 * 8;
constexpr int kNumericYWin2 = 36;

}  // namespace detail

template <class R>
QYSeries<R> theta_prime_series(ThetaKind kind, int q_order8, int y_min2, int y_max2) {
  return dz(theta_series<R>(kind, q_order8, y_min2, y_max2));
}

inline Cx theta_prime_numeric(ThetaKind kind, Cx v, Cx tau) {
  const auto& s = detail::cached_theta_series(
      kind, detail::kNumericQOrder8, -detail::kNumericYWin2, detail::kNumericYWin2);
  return eval_numeric(dz(s), v, tau);
}

// ---------------------------------------------------------------------------
// Nilpotent shifts: theta(z + nu) as a finite Taylor sum over a Form.

/// Scales every coefficient of a scalar series by a fixed form.
template <class R>
QYSeries<Form<R>> lift_scaled(const QYSeries<R>& s, const Form<R>& f) {
  QYSeries<Form<R>> r(s.q_order8, s.y_min2, s.y_max2);
  r.truncated_y = s.truncated_y;
  for (const auto& [k, c] : s.terms) r.accumulate(k.q8, k.y2, f.scaled(c));
  return r;
}

inline long factorial_small(int k) {
  long f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

/// theta_kind(z + nu) = sum_k dz^k(theta)/k! nu^k for nilpotent even nu.
template <class R>
QYSeries<Form<R>> theta_shifted(ThetaKind kind, const Form<R>& nu, int q_order8,
                                int y_min2, int y_max2) {
  int parity = 0;
  if (!nu.has_pure_parity(&parity) || parity != 0)
    throw InvalidShiftError("theta shift must be an even form");
  if (!nu.is_nilpotent())
    throw InvalidShiftError("theta shift must have zero scalar part");

  QYSeries<R> deriv = theta_series<R>(kind, q_order8, y_min2, y_max2);
  Form<R> pw = nu.model() ? Form<R>::scalar(nu.model(), ring<R>::one())
                          : Form<R>::scalar(nullptr, ring<R>::one());
  QYSeries<Form<R>> acc = lift_scaled(deriv, pw);
  const int kmax = nu.model() ? nu.model()->max_degree() / 2 + 1 : 1;
  for (int k = 1; k <= kmax; ++k) {
    pw = pw * nu;
    if (pw.is_zero()) break;
    deriv = dz(deriv);
    acc = acc + lift_scaled(deriv, pw.scaled(ring<R>::from_ratio(1, factorial_small(k))));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Transformation laws.

enum class ThetaLaw {
  TShift,
  SInversion,
  ZPlusOne,
  ZPlusTau,
  DerivativeT,
  DerivativeS,
  DerivativeZPlusOne,
  DerivativeZPlusTau,
};

namespace detail {

inline ThetaKind t_partner(ThetaKind k) {
  switch (k) {
    case ThetaKind::Theta2: return ThetaKind::Theta3;
    case ThetaKind::Theta3: return ThetaKind::Theta2;
    default: return k;
  }
}
inline ThetaKind s_partner(ThetaKind k) {
  switch (k) {
    case ThetaKind::Theta1: return ThetaKind::Theta2;
    case ThetaKind::Theta2: return ThetaKind::Theta1;
    default: return k;
  }
}

}  // namespace detail

/// |LHS - RHS| of the named law at (v, tau), all thetas via the numeric
/// product and theta' via the series derivative.
inline double theta_transform_residual(ThetaKind kind, ThetaLaw law, Cx v, Cx tau,
                                       int n_factors = 40) {
  using std::exp;
  const double pi = std::numbers::pi;
  const Cx I{0.0, 1.0};
  auto th = [&](ThetaKind k, Cx z, Cx t) { return theta_numeric(k, z, t, n_factors); };
  auto thp = [&](ThetaKind k, Cx z, Cx t) { return theta_prime_numeric(k, z, t); };

  if ((law == ThetaLaw::SInversion || law == ThetaLaw::DerivativeS) &&
      (-1.0 / tau).imag() <= 0.4)
    throw SamplingError("transformed tau outside the admissible region");
  if ((law == ThetaLaw::TShift || law == ThetaLaw::DerivativeT) && tau.imag() <= 0.4)
    throw SamplingError("tau outside the admissible region");

  const Cx eighth = exp(I * pi / 4.0);
  const bool first_pair = detail::has_prefactor(kind);  // theta or theta1
  const double zsign = first_pair ? -1.0 : 1.0;         // v+1 sign
  // v+tau sign: -,+,-,+ for theta, theta1, theta2, theta3
  const double wsign =
      (kind == ThetaKind::Theta || kind == ThetaKind::Theta2) ? -1.0 : 1.0;
  const Cx wfac = exp(-I * pi * (tau + 2.0 * v));
  // S prefactor: (tau/i)^{1/2} e^{pi i tau v^2}, with an extra 1/i for theta
  const Cx sroot = std::sqrt(tau / I);
  const Cx spre = (kind == ThetaKind::Theta ? 1.0 / I : Cx{1.0, 0.0}) * sroot *
                  exp(I * pi * tau * v * v);

  switch (law) {
    case ThetaLaw::TShift:
      return std::abs(th(kind, v, tau + 1.0) -
                      (first_pair ? eighth : Cx{1.0, 0.0}) *
                          th(detail::t_partner(kind), v, tau));
    case ThetaLaw::SInversion:
      return std::abs(th(kind, v, -1.0 / tau) -
                      spre * th(detail::s_partner(kind), tau * v, tau));
    case ThetaLaw::ZPlusOne:
      return std::abs(th(kind, v + 1.0, tau) - zsign * th(kind, v, tau));
    case ThetaLaw::ZPlusTau:
      return std::abs(th(kind, v + tau, tau) - wsign * wfac * th(kind, v, tau));
    case ThetaLaw::DerivativeT:
      return std::abs(thp(kind, v, tau + 1.0) -
                      (first_pair ? eighth : Cx{1.0, 0.0}) *
                          thp(detail::t_partner(kind), v, tau));
    case ThetaLaw::DerivativeS: {
      ThetaKind p = detail::s_partner(kind);
      Cx rhs = spre * (2.0 * pi * I * tau * v * th(p, tau * v, tau) +
                       tau * thp(p, tau * v, tau));
      return std::abs(thp(kind, v, -1.0 / tau) - rhs);
    }
    case ThetaLaw::DerivativeZPlusOne:
      return std::abs(thp(kind, v + 1.0, tau) - zsign * thp(kind, v, tau));
    case ThetaLaw::DerivativeZPlusTau: {
      // d/dv of the v+tau law: the exponential contributes -2 pi i
      Cx rhs = wsign * wfac * (thp(kind, v, tau) - 2.0 * pi * I * th(kind, v, tau));
      return std::abs(thp(kind, v + tau, tau) - rhs);
    }
  }
  return 0.0;
}

}  // namespace hf
