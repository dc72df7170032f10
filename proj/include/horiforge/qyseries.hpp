#pragma once

#include <cstdint>
#include <map>
#include <omp.h>
#include <stdexcept>
#include <vector>

#include "horiforge/forms.hpp"

namespace hf {

struct NotInvertibleError : std::domain_error {
  using std::domain_error::domain_error;
};
struct DivergentArgumentError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Coefficient traits: uniform interface over scalar rings and Forms.
template <class C>
struct coeff {
  static C zero() { return ring<C>::zero(); }
  static C one() { return ring<C>::one(); }
  static bool is_zero(const C& c) { return ring<C>::is_zero(c); }
  static C add(const C& a, const C& b) { return a + b; }
  static C mul(const C& a, const C& b) { return a * b; }
  static C neg(const C& a) { return -a; }
  static C inv(const C& a) { return ring<C>::inv(a); }
  static C div_int(const C& a, long k) { return a * ring<C>::from_ratio(1, k); }
  static C dz_scale(const C& a, int y2) { return a * ring<C>::dz_factor(y2); }
  static bool is_nilpotent(const C&) { return false; }
  static double max_abs(const C& a) { return std::abs(ring<C>::to_complex(a)); }
};

template <class R>
struct coeff<Form<R>> {
  static Form<R> zero() { return Form<R>(); }
  static Form<R> one() { return Form<R>::scalar(nullptr, ring<R>::one()); }
  static bool is_zero(const Form<R>& c) { return c.is_zero(); }
  static Form<R> add(const Form<R>& a, const Form<R>& b) { return a + b; }
  static Form<R> mul(const Form<R>& a, const Form<R>& b) { return a * b; }
  static Form<R> neg(const Form<R>& a) { return -a; }
  static Form<R> inv(const Form<R>& a) { return a.inv(); }
  static Form<R> div_int(const Form<R>& a, long k) {
    return a.scaled(ring<R>::from_ratio(1, k));
  }
  static Form<R> dz_scale(const Form<R>& a, int y2) {
    return a.scaled(ring<R>::dz_factor(y2));
  }
  static bool is_nilpotent(const Form<R>& a) { return a.is_nilpotent(); }
  static double max_abs(const Form<R>& a) { return a.max_abs_coeff(); }
};

template <class C>
class QYSeries;

/// Neutral truncation parameters: wide enough that with_min_params always
/// defers to the other operand.
inline constexpr int kNeutralQOrder8 = 1 << 28;
inline constexpr int kNeutralYWin2 = 1 << 28;

template <class C>
struct coeff<QYSeries<C>> {
  static QYSeries<C> zero() {
    return QYSeries<C>(kNeutralQOrder8, -kNeutralYWin2, kNeutralYWin2);
  }
  static QYSeries<C> one() {
    auto s = zero();
    s.set(0, 0, coeff<C>::one());
    return s;
  }
  static bool is_zero(const QYSeries<C>& s) { return s.is_zero(); }
  static QYSeries<C> add(const QYSeries<C>& a, const QYSeries<C>& b) { return a + b; }
  static QYSeries<C> mul(const QYSeries<C>& a, const QYSeries<C>& b);
  static QYSeries<C> neg(const QYSeries<C>& a) { return -a; }
  static QYSeries<C> inv(const QYSeries<C>& a);
  static QYSeries<C> div_int(const QYSeries<C>& a, long k) {
    QYSeries<C> r(a.q_order8, a.y_min2, a.y_max2);
    r.truncated_y = a.truncated_y;
    for (const auto& [key, c] : a.terms)
      r.accumulate(key.q8, key.y2, coeff<C>::div_int(c, k));
    return r;
  }
  static QYSeries<C> dz_scale(const QYSeries<C>&, int) = delete;
  static bool is_nilpotent(const QYSeries<C>& a) {
    for (const auto& [key, c] : a.terms)
      if (!coeff<C>::is_nilpotent(c)) return false;
    return true;
  }
  static double max_abs(const QYSeries<C>& a) {
    double m = 0;
    for (const auto& [key, c] : a.terms) m = std::max(m, coeff<C>::max_abs(c));
    return m;
  }
};

/// Exponent key: r_q = q8/8 and r_y = y2/2, kept as scaled integers so that
/// keys stay exact (denominators 8 and 2 respectively).
struct QKey {
  int q8;
  int y2;
  auto operator<=>(const QKey&) const = default;
};

/// Truncated bivariate Laurent series in q and y.  Terms with q-exponent
/// above q_order8/8 are dropped silently (truncation order); terms falling
/// outside the y-window are dropped and flagged.
template <class C>
class QYSeries {
 public:
  std::map<QKey, C> terms;
  int q_order8 = 16 * 8;        // keep q8 <= q_order8
  int y_min2 = -16, y_max2 = 16;  // window bounds in halves
  bool truncated_y = false;

  QYSeries() = default;
  QYSeries(int q_order8_, int y_min2_, int y_max2_)
      : q_order8(q_order8_), y_min2(y_min2_), y_max2(y_max2_) {}

  static QYSeries constant(C c, int q_order8, int y_min2, int y_max2) {
    QYSeries s(q_order8, y_min2, y_max2);
    s.set(0, 0, std::move(c));
    return s;
  }
  static QYSeries monomial(int q8, int y2, C c, int q_order8, int y_min2,
                           int y_max2) {
    QYSeries s(q_order8, y_min2, y_max2);
    s.set(q8, y2, std::move(c));
    return s;
  }

  bool is_zero() const { return terms.empty(); }

  void set(int q8, int y2, C c) {
    if (coeff<C>::is_zero(c)) return;
    if (q8 > q_order8) return;
    if (y2 < y_min2 || y2 > y_max2) {
      truncated_y = true;
      return;
    }
    terms[{q8, y2}] = std::move(c);
  }

  void accumulate(int q8, int y2, const C& c) {
    if (coeff<C>::is_zero(c)) return;
    if (q8 > q_order8) return;
    if (y2 < y_min2 || y2 > y_max2) {
      truncated_y = true;
      return;
    }
    auto it = terms.find({q8, y2});
    if (it == terms.end()) {
      terms[{q8, y2}] = c;
    } else {
      it->second = coeff<C>::add(it->second, c);
      if (coeff<C>::is_zero(it->second)) terms.erase(it);
    }
  }

  C get(int q8, int y2) const {
    auto it = terms.find({q8, y2});
    return it == terms.end() ? coeff<C>::zero() : it->second;
  }

  QYSeries operator+(const QYSeries& o) const {
    QYSeries r = with_min_params(o);
    for (const auto& [k, c] : terms) r.accumulate(k.q8, k.y2, c);
    for (const auto& [k, c] : o.terms) r.accumulate(k.q8, k.y2, c);
    return r;
  }
  QYSeries operator-() const {
    QYSeries r = *this;
    for (auto& [k, c] : r.terms) c = coeff<C>::neg(c);
    return r;
  }
  QYSeries operator-(const QYSeries& o) const { return *this + (-o); }

  QYSeries scaled(const C& c) const {
    QYSeries r(q_order8, y_min2, y_max2);
    r.truncated_y = truncated_y;
    for (const auto& [k, v] : terms) r.accumulate(k.q8, k.y2, coeff<C>::mul(v, c));
    return r;
  }

  /// Restricts to a narrower y-window (used to compare like-truncated
  /// objects after computing with internal slack).
  QYSeries restricted(int new_y_min2, int new_y_max2) const {
    QYSeries r(q_order8, new_y_min2, new_y_max2);
    r.truncated_y = truncated_y;
    for (const auto& [k, c] : terms) r.accumulate(k.q8, k.y2, c);
    return r;
  }
  /// Same with a lower q-truncation order; needed whenever inverses with
  /// negative leading q-exponent are in play (they pull dropped terms from
  /// just above the old order back under it).
  QYSeries restricted(int new_q_order8, int new_y_min2, int new_y_max2) const {
    QYSeries r(new_q_order8, new_y_min2, new_y_max2);
    r.truncated_y = truncated_y;
    for (const auto& [k, c] : terms) r.accumulate(k.q8, k.y2, c);
    return r;
  }

  QYSeries with_min_params(const QYSeries& o) const {
    QYSeries r(std::min(q_order8, o.q_order8), std::max(y_min2, o.y_min2),
               std::min(y_max2, o.y_max2));
    r.truncated_y = truncated_y || o.truncated_y;
    return r;
  }

  double max_abs_diff(const QYSeries& o) const {
    double m = 0;
    for (const auto& [k, c] : terms)
      m = std::max(m, coeff<C>::max_abs(coeff<C>::add(c, coeff<C>::neg(o.get(k.q8, k.y2)))));
    for (const auto& [k, c] : o.terms)
      if (!terms.count(k)) m = std::max(m, coeff<C>::max_abs(c));
    return m;
  }
  double max_abs() const {
    double m = 0;
    for (const auto& [k, c] : terms) m = std::max(m, coeff<C>::max_abs(c));
    return m;
  }
};

// ---------------------------------------------------------------------------
// Multiplication: serial reference and the OpenMP kernel.

template <class C>
QYSeries<C> series_mul_serial(const QYSeries<C>& a, const QYSeries<C>& b) {
  QYSeries<C> r = a.with_min_params(b);
  for (const auto& [ka, ca] : a.terms) {
    if (ka.q8 > r.q_order8) continue;
    for (const auto& [kb, cb] : b.terms) {
      if (ka.q8 + kb.q8 > r.q_order8) continue;
      r.accumulate(ka.q8 + kb.q8, ka.y2 + kb.y2, coeff<C>::mul(ca, cb));
    }
  }
  return r;
}

/// Convolution product parallelized over the terms of the left factor with
/// per-thread accumulation maps merged at the end.  Falls back to the serial
/// kernel for small inputs.
template <class C>
QYSeries<C> series_mul(const QYSeries<C>& a, const QYSeries<C>& b) {
  const size_t work = a.terms.size() * b.terms.size();
  if (work < 4096 || omp_get_max_threads() == 1) return series_mul_serial(a, b);

  QYSeries<C> r = a.with_min_params(b);
  std::vector<std::pair<QKey, const C*>> av;
  av.reserve(a.terms.size());
  for (const auto& [k, c] : a.terms) av.emplace_back(k, &c);

  const int nthreads = omp_get_max_threads();
  std::vector<QYSeries<C>> partial(nthreads, r);
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < static_cast<long>(av.size()); ++i) {
    QYSeries<C>& acc = partial[omp_get_thread_num()];
    const auto& [ka, ca] = av[i];
    if (ka.q8 > acc.q_order8) continue;
    for (const auto& [kb, cb] : b.terms) {
      if (ka.q8 + kb.q8 > acc.q_order8) continue;
      acc.accumulate(ka.q8 + kb.q8, ka.y2 + kb.y2, coeff<C>::mul(*ca, cb));
    }
  }
  for (const auto& p : partial) {
    r.truncated_y = r.truncated_y || p.truncated_y;
    for (const auto& [k, c] : p.terms) r.accumulate(k.q8, k.y2, c);
  }
  return r;
}

template <class C>
QYSeries<C> operator*(const QYSeries<C>& a, const QYSeries<C>& b) {
  return series_mul(a, b);
}

// ---------------------------------------------------------------------------
// Inversion, exp and log.

namespace detail {

/// True when every term of `a` lies in the augmentation ideal: positive
/// q-exponent, positive y-exponent at q^0, or a nilpotent coefficient at any
/// exponent (powers of such terms die by nilpotency before they could drift
/// back to the constant slot).
template <class C>
bool in_augmentation_ideal(const QYSeries<C>& a) {
  for (const auto& [k, c] : a.terms) {
    if (k.q8 > 0) continue;
    if (k.q8 == 0 && k.y2 > 0) continue;
    if (coeff<C>::is_nilpotent(c)) continue;
    return false;
  }
  return true;
}

/// Safe iteration bound: powers of an augmentation-ideal element must
/// escape the truncation box (or exhaust nilpotency) within this many steps.
template <class C>
int power_guard(const QYSeries<C>& a) {
  return a.q_order8 + (a.y_max2 - a.y_min2) + 40;
}

}  // namespace detail

template <class C>
QYSeries<C> series_inv(const QYSeries<C>& a) {
  if (a.terms.empty()) throw NotInvertibleError("cannot invert the zero series");
  // leading term: minimal q-exponent, then minimal y-exponent
  QKey lead = a.terms.begin()->first;  // map order: (q8, y2) lexicographic
  const C& lc = a.terms.begin()->second;
  C lci;
  try {
    lci = coeff<C>::inv(lc);
  } catch (const std::domain_error&) {
    throw NotInvertibleError("leading coefficient is not invertible");
  }
  // n = a / lead - 1, every term in the augmentation ideal
  QYSeries<C> n(a.q_order8, a.y_min2, a.y_max2);
  n.truncated_y = a.truncated_y;
  for (const auto& [k, c] : a.terms) {
    if (k == lead) continue;
    n.accumulate(k.q8 - lead.q8, k.y2 - lead.y2, coeff<C>::mul(c, lci));
  }
  if (!detail::in_augmentation_ideal(n))
    throw NotInvertibleError("no invertible leading term after factoring");
  if (n.y_max2 < a.y_max2 - lead.y2) n.truncated_y = true;

  // geometric series sum (-n)^k, then shift back by the leading monomial
  QYSeries<C> acc = QYSeries<C>::constant(coeff<C>::one(), a.q_order8, a.y_min2, a.y_max2);
  QYSeries<C> pw = acc;
  const int guard = detail::power_guard(a);
  for (int k = 1; k <= guard && !pw.is_zero(); ++k) {
    pw = series_mul(pw, n);
    acc = (k % 2 == 1) ? acc - pw : acc + pw;
  }
  QYSeries<C> r(a.q_order8, a.y_min2, a.y_max2);
  r.truncated_y = acc.truncated_y;
  for (const auto& [k, c] : acc.terms)
    r.accumulate(k.q8 - lead.q8, k.y2 - lead.y2, coeff<C>::mul(c, lci));
  // inverting past the window top necessarily cuts the geometric tail
  if (!n.is_zero()) r.truncated_y = true;
  return r;
}

enum class ExpLog { Exp, LogOfOnePlus };

template <class C>
QYSeries<C> series_exp_log(const QYSeries<C>& a, ExpLog which) {
  if (!detail::in_augmentation_ideal(a))
    throw DivergentArgumentError("argument not in the augmentation ideal");
  QYSeries<C> acc(a.q_order8, a.y_min2, a.y_max2);
  acc.truncated_y = a.truncated_y;
  if (which == ExpLog::Exp)
    acc.accumulate(0, 0, coeff<C>::one());
  // exp keeps pw = a^k/k! incrementally; log keeps pw = a^k and scales by 1/k
  QYSeries<C> pw = QYSeries<C>::constant(coeff<C>::one(), a.q_order8, a.y_min2, a.y_max2);
  const int guard = detail::power_guard(a);
  for (int k = 1; k <= guard; ++k) {
    pw = series_mul(pw, a);
    if (pw.is_zero()) break;
    if (which == ExpLog::Exp) {
      for (auto& [key, c] : pw.terms) c = coeff<C>::div_int(c, k);
      acc = acc + pw;
    } else {
      QYSeries<C> term(a.q_order8, a.y_min2, a.y_max2);
      for (const auto& [key, c] : pw.terms) {
        C v = coeff<C>::div_int(c, k);
        if (k % 2 == 0) v = coeff<C>::neg(v);
        term.accumulate(key.q8, key.y2, v);
      }
      acc = acc + term;
    }
    acc.truncated_y = acc.truncated_y || pw.truncated_y;
  }
  return acc;
}

template <class C>
QYSeries<C> series_exp(const QYSeries<C>& a) {
  return series_exp_log(a, ExpLog::Exp);
}
template <class C>
QYSeries<C> series_log1p(const QYSeries<C>& a) {
  return series_exp_log(a, ExpLog::LogOfOnePlus);
}

// ---------------------------------------------------------------------------
// z-derivative and numeric evaluation.

/// d/dz under y = e^{-2 pi i z}: the (r_q, r_y) term picks up -2 pi i r_y.
template <class C>
QYSeries<C> dz(const QYSeries<C>& a) {
  QYSeries<C> r(a.q_order8, a.y_min2, a.y_max2);
  r.truncated_y = a.truncated_y;
  for (const auto& [k, c] : a.terms) {
    if (k.y2 == 0) continue;
    r.accumulate(k.q8, k.y2, coeff<C>::dz_scale(c, k.y2));
  }
  return r;
}

namespace detail {
template <class C>
struct eval_helper {
  static C scale(const C& c, Cx w);
};
template <>
struct eval_helper<Cx> {
  static Cx scale(const Cx& c, Cx w) { return c * w; }
};
template <>
struct eval_helper<Form<Cx>> {
  static Form<Cx> scale(const Form<Cx>& c, Cx w) { return c.scaled(w); }
};
}  // namespace detail

/// Substitutes q = e^{2 pi i tau}, y = e^{-2 pi i z} and sums the series.
template <class C>
C eval_numeric(const QYSeries<C>& a, Cx z, Cx tau) {
  const Cx two_pi_i{0.0, 2.0 * std::numbers::pi};
  C s = coeff<C>::zero();
  for (const auto& [k, c] : a.terms) {
    Cx w = std::exp(two_pi_i * (tau * (k.q8 / 8.0) - z * (k.y2 / 2.0)));
    s = coeff<C>::add(s, detail::eval_helper<C>::scale(c, w));
  }
  return s;
}

template <class C>
QYSeries<C> coeff<QYSeries<C>>::mul(const QYSeries<C>& a, const QYSeries<C>& b) {
  return series_mul(a, b);
}
template <class C>
QYSeries<C> coeff<QYSeries<C>>::inv(const QYSeries<C>& a) {
  return series_inv(a);
}

/// Coefficientwise conversion of exact series to floating series.
inline QYSeries<Cx> to_numeric(const QYSeries<Exact>& a) {
  QYSeries<Cx> r(a.q_order8, a.y_min2, a.y_max2);
  r.truncated_y = a.truncated_y;
  for (const auto& [k, c] : a.terms) r.set(k.q8, k.y2, c.to_complex());
  return r;
}

}  // namespace hf
