#pragma once

#include "horiforge/gerbe.hpp"

namespace hf {

/// The four generating functions reuse the theta kinds: each carries the same
/// factor pattern (exponent offset u or u-1/2, sign -/+) as its theta partner.
inline SubgroupId group_for_kind(ThetaKind k) {
  switch (k) {
    case ThetaKind::Theta: return SubgroupId::SL2Z;
    case ThetaKind::Theta1: return SubgroupId::Gamma0_2;
    case ThetaKind::Theta2: return SubgroupId::Gamma_upper0_2;
    case ThetaKind::Theta3: return SubgroupId::GammaTheta;
  }
  return SubgroupId::SL2Z;
}

namespace detail {

template <class R>
void require_ratio_pair(const GerbeModule<R>& E, const GerbeModule<R>& Ep,
                        bool need_diagonal) {
  if (E.rank != Ep.rank)
    throw InvalidModuleError("ratio requires equal ranks");
  if (!(E.B == Ep.B)) throw InvalidModuleError("ratio requires matching B");
  if (need_diagonal && (!E.diagonal() || !Ep.diagonal()))
    throw InvalidModuleError("diagonal presentations required");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Graded twisted Chern character of the Witten-module ratio: product formula.

/// prod_u prod_i (1 + s q^{u+off} y e^{-2 pi i(B+rho_i)})(1 + s q^{u+off}
/// y^{-1} e^{+2 pi i(B+rho_i)}) over the same for the sigma_i, inverted.
/// The level-m twist e^{-2 pi i m B} is carried per factor by the y-monomials.
template <class R>
QYSeries<Form<R>> gch_ratio(ThetaKind kind, const GerbeModule<R>& E,
                            const GerbeModule<R>& Ep, int q_order8, int y_min2,
                            int y_max2) {
  detail::require_ratio_pair(E, Ep, /*need_diagonal=*/true);
  using S = QYSeries<Form<R>>;
  const R sgn = ring<R>::from_int(detail::theta_sign(kind));
  const R m2 = ring<R>::minus_2pii();
  auto one_f = Form<R>::scalar(E.model, ring<R>::one());

  struct Mono {
    int y2;
    Form<R> coeff;
    bool invert;
  };
  std::vector<Mono> monos;
  for (const auto& rho : E.roots) {
    Form<R> arg = (E.B + rho).scaled(m2);
    monos.push_back({2, form_exp(arg).scaled(sgn), false});
    monos.push_back({-2, form_exp(-arg).scaled(sgn), false});
  }
  for (const auto& si : Ep.roots) {
    Form<R> arg = (Ep.B + si).scaled(m2);
    monos.push_back({2, form_exp(arg).scaled(sgn), true});
    monos.push_back({-2, form_exp(-arg).scaled(sgn), true});
  }

  S r = S::constant(one_f, q_order8, y_min2, y_max2);
  for (int u = 1; detail::theta_offset8(kind, u) <= q_order8; ++u) {
    const int off = detail::theta_offset8(kind, u);
    for (const auto& mo : monos) {
      S f(q_order8, y_min2, y_max2);
      f.set(0, 0, one_f);
      f.accumulate(off, mo.y2, mo.coeff);
      r = series_mul(r, mo.invert ? series_inv(f) : f);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Brute-force coefficient oracle: expands each Lambda-factor into exterior
// powers (elementary symmetric polynomials of the per-root monomials) with
// its own exponent bookkeeping, independent of the series layer.

/// Coefficient of q^{n8/8} y^{m} in the ratio, exact.
template <class R>
Form<R> wmn_character(int m, int n8, ThetaKind kind, const GerbeModule<R>& E,
                      const GerbeModule<R>& Ep) {
  detail::require_ratio_pair(E, Ep, true);
  if (n8 < 0) throw std::invalid_argument("wmn_character: n must be >= 0");
  using Key = std::pair<int, int>;  // (q8, y2)
  using Poly = std::map<Key, Form<R>>;
  const long sgn = detail::theta_sign(kind);
  const R m2 = ring<R>::minus_2pii();

  auto padd = [](Poly& p, Key k, const Form<R>& c) {
    auto it = p.find(k);
    if (it == p.end()) {
      if (!c.is_zero()) p[k] = c;
    } else {
      it->second = it->second + c;
      if (it->second.is_zero()) p.erase(it);
    }
  };
  auto pmul = [&](const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ka, ca] : a)
      for (const auto& [kb, cb] : b) {
        if (ka.first + kb.first > n8) continue;
        padd(r, {ka.first + kb.first, ka.second + kb.second}, ca * cb);
      }
    return r;
  };

  // elementary symmetric polynomials e_0..e_N of the given forms
  auto elementary = [&](const std::vector<Form<R>>& xs) {
    std::vector<Form<R>> e(xs.size() + 1, Form<R>(E.model));
    e[0] = Form<R>::scalar(E.model, ring<R>::one());
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t k = std::min(i + 1, xs.size()); k >= 1; --k)
        e[k] = e[k] + e[k - 1] * xs[i];
    return e;
  };

  std::vector<Form<R>> ymon, yinvmon, dymon, dyinvmon;
  for (const auto& rho : E.roots) {
    ymon.push_back(form_exp((E.B + rho).scaled(m2)));
    yinvmon.push_back(form_exp(-((E.B + rho).scaled(m2))));
  }
  for (const auto& si : Ep.roots) {
    dymon.push_back(form_exp((Ep.B + si).scaled(m2)));
    dyinvmon.push_back(form_exp(-((Ep.B + si).scaled(m2))));
  }
  auto ey = elementary(ymon), eyi = elementary(yinvmon);

  Poly acc;
  padd(acc, {0, 0}, Form<R>::scalar(E.model, ring<R>::one()));
  for (int u = 1; detail::theta_offset8(kind, u) <= n8; ++u) {
    const int off = detail::theta_offset8(kind, u);
    // numerator level-u block: Lambda_{sgn q^{off}} of the y and y^{-1} sides
    Poly block;
    long sk = 1;
    for (size_t k = 0; k < ey.size(); ++k) {
      if (off * static_cast<int>(k) <= n8)
        padd(block, {off * static_cast<int>(k), 2 * static_cast<int>(k)},
             ey[k].scaled(ring<R>::from_int(sk)));
      sk *= sgn;
    }
    Poly blocki;
    sk = 1;
    for (size_t k = 0; k < eyi.size(); ++k) {
      if (off * static_cast<int>(k) <= n8)
        padd(blocki, {off * static_cast<int>(k), -2 * static_cast<int>(k)},
             eyi[k].scaled(ring<R>::from_int(sk)));
      sk *= sgn;
    }
    acc = pmul(acc, block);
    acc = pmul(acc, blocki);
    // denominator factors: per-root geometric inverses
    for (size_t i = 0; i < dymon.size(); ++i) {
      for (int side = 0; side < 2; ++side) {
        const Form<R>& x = side == 0 ? dymon[i] : dyinvmon[i];
        Poly geo;
        Form<R> pw = Form<R>::scalar(E.model, ring<R>::one());
        long s = 1;
        for (int k = 0; off * k <= n8; ++k) {
          padd(geo, {off * k, (side == 0 ? 2 : -2) * k},
               pw.scaled(ring<R>::from_int(s)));
          pw = pw * x;
          s *= -sgn;
        }
        acc = pmul(acc, geo);
      }
    }
  }
  auto it = acc.find({n8, 2 * m});
  return it == acc.end() ? Form<R>(E.model) : it->second;
}

// ---------------------------------------------------------------------------
// Determinant prefactors and the capital generating functions.

/// sinh(pi i z) = (y^{-1/2} - y^{1/2})/2 under y = e^{-2 pi i z}.
template <class R>
QYSeries<R> sinh_series(int q_order8, int y_min2, int y_max2) {
  QYSeries<R> s(q_order8, y_min2, y_max2);
  s.set(0, -1, ring<R>::from_ratio(1, 2));
  s.set(0, 1, ring<R>::from_ratio(-1, 2));
  return s;
}
template <class R>
QYSeries<R> cosh_series(int q_order8, int y_min2, int y_max2) {
  QYSeries<R> s(q_order8, y_min2, y_max2);
  s.set(0, -1, ring<R>::from_ratio(1, 2));
  s.set(0, 1, ring<R>::from_ratio(1, 2));
  return s;
}

namespace detail {

template <class R>
std::vector<Form<R>> shifted_roots(const GerbeModule<R>& E) {
  std::vector<Form<R>> out;
  for (const auto& rho : E.roots) out.push_back(E.B + rho);
  return out;
}

template <class R>
int jet_order(const GerbeModule<R>& E) {
  return E.model->max_degree() / 2 + 1;
}

}  // namespace detail

/// W/A/B/C: the gch ratio times the sinh- (Theta), cosh- (Theta1) or trivial
/// (Theta2, Theta3) determinant prefactor with arguments pi i (z + B + rho).
template <class R>
QYSeries<Form<R>> witten_capital(ThetaKind kind, const GerbeModule<R>& E,
                                 const GerbeModule<R>& Ep, int q_order8,
                                 int y_min2, int y_max2) {
  auto base = gch_ratio(kind, E, Ep, q_order8, y_min2, y_max2);
  if (kind == ThetaKind::Theta2 || kind == ThetaKind::Theta3) return base;
  auto s = kind == ThetaKind::Theta ? sinh_series<R>(q_order8, y_min2, y_max2)
                                    : cosh_series<R>(q_order8, y_min2, y_max2);
  auto pref = det_holo_diag(series_jet(s, detail::jet_order(E)),
                            detail::shifted_roots(E), detail::shifted_roots(Ep));
  return series_mul(base, pref);
}

/// det(theta_kind(z + B + F^E) / theta_kind(z + B + F^{E'})): the other side
/// of the central identity.  Diagonal data goes through the root product,
/// matrix curvatures through exp-trace-log.
template <class R>
QYSeries<Form<R>> theta_det_form(ThetaKind kind, const GerbeModule<R>& E,
                                 const GerbeModule<R>& Ep, int q_order8,
                                 int y_min2, int y_max2) {
  detail::require_ratio_pair(E, Ep, false);
  auto jet = series_jet(theta_series<R>(kind, q_order8, y_min2, y_max2),
                        detail::jet_order(E));
  if (E.diagonal() && Ep.diagonal())
    return det_holo_diag(jet, detail::shifted_roots(E), detail::shifted_roots(Ep));
  auto remainder = [](const GerbeModule<R>& M) {
    auto N = M.curvature_matrix();
    auto BI = FormMatrix<R>::identity(M.rank).scaled(M.B);
    return BI + N;
  };
  return det_holo(jet, remainder(E), remainder(Ep));
}

// ---------------------------------------------------------------------------
// deri-theta identities.

/// Trace of theta'/theta(z + B + F^E) - theta'/theta(z + B + F^{E'}).  The
/// subtracted variant removes theta'/theta(z) from each block first; at equal
/// rank the two agree identically (the paper's regularization is a no-op at
/// finite rank).
template <class R>
QYSeries<Form<R>> deri_trace(ThetaKind kind, const GerbeModule<R>& E,
                             const GerbeModule<R>& Ep, int q_order8, int y_min2,
                             int y_max2, bool subtracted = false) {
  detail::require_ratio_pair(E, Ep, false);
  auto th = theta_series<R>(kind, q_order8, y_min2, y_max2);
  auto g = series_mul(dz(th), series_inv(th));
  auto jet = series_jet(g, detail::jet_order(E));
  auto block = [&](const GerbeModule<R>& M) {
    QYSeries<Form<R>> t(q_order8, y_min2, y_max2);
    if (M.diagonal()) {
      for (const auto& rho : M.roots) t = t + apply_jet(jet, M.B + rho);
    } else {
      auto BI = FormMatrix<R>::identity(M.rank).scaled(M.B);
      t = holo_apply(jet, BI + M.curvature_matrix()).trace();
    }
    if (subtracted) {
      auto base = lift_scaled(jet[0], Form<R>::scalar(M.model, ring<R>::one()));
      t = t - base.scaled(Form<R>::scalar(nullptr, ring<R>::from_int(M.rank)));
    }
    return t;
  };
  return block(E) - block(Ep);
}

/// -(i/2 pi)[d/dz det - det * deri_trace]: zero by the deri-theta theorems.
template <class R>
QYSeries<Form<R>> deri_residual(ThetaKind kind, const GerbeModule<R>& E,
                                const GerbeModule<R>& Ep, int q_order8,
                                int y_min2, int y_max2) {
  auto det = theta_det_form(kind, E, Ep, q_order8, y_min2, y_max2);
  auto tr = deri_trace(kind, E, Ep, q_order8, y_min2, y_max2);
  auto diff = dz(det) - series_mul(det, tr);
  return diff.scaled(Form<R>::scalar(nullptr, ring<R>::minus_i_over_2pi()));
}

// ---------------------------------------------------------------------------
// Pointwise (numeric) evaluation of the determinant side, used by the Jacobi
// checks: modular transformations move tau, so fixed q-truncations cannot be
// trusted there and the series is re-summed at each sample.

inline std::vector<Cx> theta_jet_numeric(ThetaKind kind, Cx z, Cx tau, int order) {
  const auto& s = detail::cached_theta_series(
      kind, detail::kNumericQOrder8, -detail::kNumericYWin2, detail::kNumericYWin2);
  std::vector<Cx> jet;
  QYSeries<Cx> cur = s;
  double fact = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) {
      cur = dz(cur);
      fact *= k;
    }
    jet.push_back(eval_numeric(cur, z, tau) / fact);
  }
  return jet;
}

/// det(theta(z+B+F^E)/theta(z+B+F^{E'})) at a point, Form-valued.
inline Form<Cx> theta_det_numeric(ThetaKind kind, const GerbeModule<Cx>& E,
                                  const GerbeModule<Cx>& Ep, Cx z, Cx tau) {
  detail::require_ratio_pair(E, Ep, true);
  auto jet = theta_jet_numeric(kind, z, tau, detail::jet_order(E));
  if (std::abs(jet[0]) < 1e-9) throw SingularPointError("theta zero at sample");
  Form<Cx> r = Form<Cx>::scalar(E.model, ring<Cx>::one());
  for (const auto& rho : E.roots) r = r * apply_jet_numeric(jet, E.B + rho);
  for (const auto& si : Ep.roots) {
    try {
      r = r * apply_jet_numeric(jet, Ep.B + si).inv();
    } catch (const std::domain_error&) {
      throw SingularPointError("theta zero at shifted sample");
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Jacobi-form verdicts.

struct JacobiVerdict {
  bool refused = false;       // anomaly gate: hypothesis violated, no verdict
  std::map<int, double> residuals;  // degree p -> max generator/lattice residual
  double worst = 0;
};

/// Raw residuals without the anomaly gate (also used as negative control).
inline std::map<int, double> witten_jacobi_residuals(
    ThetaKind kind, const GerbeModule<Cx>& E, const GerbeModule<Cx>& Ep,
    const std::vector<int>& degrees, int samples, std::mt19937_64& rng) {
  std::map<int, double> out;
  for (int p : degrees) {
    if (p < 0 || p % 2 != 0)
      throw std::invalid_argument("even-case degrees must be even");
    JacobiSpec spec{p / 2, 0, group_for_kind(kind)};
    auto f = [&](Cx z, Cx tau) {
      return degree_component(theta_det_numeric(kind, E, Ep, z, tau), p);
    };
    out[p] = jacobi_max_residual(f, spec, samples, rng);
  }
  return out;
}

/// Degree-p coefficients of the determinant are Jacobi forms of weight p/2
/// and index 0 when the anomaly vanishes; otherwise the check refuses.
inline JacobiVerdict witten_jacobi_check(ThetaKind kind, const GerbeModule<Cx>& E,
                                         const GerbeModule<Cx>& Ep,
                                         const std::vector<int>& degrees,
                                         int samples, std::mt19937_64& rng) {
  JacobiVerdict v;
  if (!anomaly(E, Ep).vanishes) {
    v.refused = true;
    return v;
  }
  v.residuals = witten_jacobi_residuals(kind, E, Ep, degrees, samples, rng);
  for (const auto& [p, r] : v.residuals) v.worst = std::max(v.worst, r);
  return v;
}

// ---------------------------------------------------------------------------
// Odd case.

/// -int_0^1 Tr[A_phi theta'/theta(z + B + F(s))] ds with exact s-integration.
template <class R>
QYSeries<Form<R>> odd_witten(ThetaKind kind, const GaugePath<R>& path,
                             int q_order8, int y_min2, int y_max2) {
  using S = QYSeries<Form<R>>;
  auto th = theta_series<R>(kind, q_order8, y_min2, y_max2);
  auto g = series_mul(dz(th), series_inv(th));
  auto jet = series_jet(g, path.base.model->max_degree() / 2 + 1);
  auto lift = [&](const QYSeries<R>& s) {
    return lift_scaled(s, Form<R>::scalar(nullptr, ring<R>::one()));
  };
  auto lift_mat = [&](const FormMatrix<R>& m) {
    Matrix<S> r(m.n);
    for (size_t i = 0; i < m.e.size(); ++i) r.e[i] = series_const_form(m.e[i]);
    return r;
  };

  auto fs = path.curvature_spoly();
  auto BI = FormMatrix<R>::identity(path.base.rank).scaled(path.base.B);
  std::vector<Matrix<S>> arg{lift_mat(BI + fs[0]), lift_mat(fs[1]), lift_mat(fs[2])};

  // g(B I + F(s)) = sum_k jet[k] (B I + F(s))^k, a polynomial in s
  std::vector<Matrix<S>> acc{Matrix<S>::identity(path.base.rank).scaled(lift(jet[0]))};
  std::vector<Matrix<S>> pw{Matrix<S>::identity(path.base.rank)};
  for (size_t k = 1; k < jet.size(); ++k) {
    pw = detail::spoly_mul(pw, arg);
    if (detail::spoly_is_zero(pw)) break;
    if (acc.size() < pw.size())
      acc.resize(pw.size(), Matrix<S>(path.base.rank));
    for (size_t j = 0; j < pw.size(); ++j)
      acc[j] = acc[j] + pw[j].scaled(lift(jet[k]));
  }

  auto aphi = lift_mat(path.A_phi);
  S out(q_order8, y_min2, y_max2);
  for (size_t j = 0; j < acc.size(); ++j) {
    S term = (aphi * acc[j]).trace();
    out = out - coeff<S>::div_int(term, static_cast<long>(j) + 1);
  }
  return out;
}

/// Pointwise value of the same integral, for the odd Jacobi checks.
inline Form<Cx> odd_witten_numeric(ThetaKind kind, const GaugePath<Cx>& path,
                                   Cx z, Cx tau) {
  const int K = path.base.model->max_degree() / 2 + 1;
  auto tj = theta_jet_numeric(kind, z, tau, K + 1);
  if (std::abs(tj[0]) < 1e-9) throw SingularPointError("theta zero at sample");
  // jet of theta'/theta from the jets of theta' and theta (jet division)
  std::vector<Cx> tp(K + 1), g(K + 1);
  for (int k = 0; k <= K; ++k) tp[k] = tj[k + 1] * static_cast<double>(k + 1);
  for (int k = 0; k <= K; ++k) {
    Cx s = tp[k];
    for (int j = 1; j <= k; ++j) s -= tj[j] * g[k - j];
    g[k] = s / tj[0];
  }

  auto fs = path.curvature_spoly();
  auto BI = FormMatrix<Cx>::identity(path.base.rank).scaled(path.base.B);
  std::vector<FormMatrix<Cx>> arg{BI + fs[0], fs[1], fs[2]};
  std::vector<FormMatrix<Cx>> acc{
      FormMatrix<Cx>::identity(path.base.rank).scaled(Form<Cx>::scalar(nullptr, g[0]))};
  std::vector<FormMatrix<Cx>> pw{FormMatrix<Cx>::identity(path.base.rank)};
  for (int k = 1; k <= K; ++k) {
    pw = detail::spoly_mul(pw, arg);
    if (detail::spoly_is_zero(pw)) break;
    if (acc.size() < pw.size()) acc.resize(pw.size(), FormMatrix<Cx>(path.base.rank));
    for (size_t j = 0; j < pw.size(); ++j)
      acc[j] = acc[j] + pw[j].scaled(Form<Cx>::scalar(nullptr, g[k]));
  }
  Form<Cx> out(path.base.model);
  for (size_t j = 0; j < acc.size(); ++j)
    out = out - (path.A_phi * acc[j]).trace().scaled(1.0 / (static_cast<double>(j) + 1.0));
  return out;
}

inline std::map<int, double> odd_jacobi_residuals(ThetaKind kind,
                                                  const GaugePath<Cx>& path,
                                                  const std::vector<int>& degrees,
                                                  int samples, std::mt19937_64& rng) {
  std::map<int, double> out;
  for (int p : degrees) {
    if (p < 1 || p % 2 != 1)
      throw std::invalid_argument("odd-case degrees must be odd");
    JacobiSpec spec{(p + 1) / 2, 0, group_for_kind(kind)};
    auto f = [&](Cx z, Cx tau) {
      return degree_component(odd_witten_numeric(kind, path, z, tau), p);
    };
    out[p] = jacobi_max_residual(f, spec, samples, rng);
  }
  return out;
}

/// Odd-case Jacobi verdict, gated on the odd anomaly Ch^{[1]} = Ch^{[3]} = 0.
inline JacobiVerdict odd_jacobi_check(ThetaKind kind, const GaugePath<Cx>& path,
                                      const std::vector<int>& degrees, int samples,
                                      std::mt19937_64& rng) {
  JacobiVerdict v;
  auto oc = odd_chern(path, 1);
  if (oc.ch1.max_abs_coeff() > 1e-12 || oc.ch3.max_abs_coeff() > 1e-12) {
    v.refused = true;
    return v;
  }
  v.residuals = odd_jacobi_residuals(kind, path, degrees, samples, rng);
  for (const auto& [p, r] : v.residuals) v.worst = std::max(v.worst, r);
  return v;
}

}  // namespace hf
