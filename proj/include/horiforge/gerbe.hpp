#pragma once

#include <array>

#include "horiforge/modular.hpp"

namespace hf {

struct MatrixShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct InvalidModuleError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Square matrix over any coefficient type with a coeff<> trait.  Used with
/// Form entries (curvatures, connections) and with Form-valued series entries
/// (functional calculus).
template <class T>
class Matrix {
 public:
  int n = 0;
  std::vector<T> e;

  Matrix() = default;
  explicit Matrix(int n_) : n(n_), e(static_cast<size_t>(n_) * n_, coeff<T>::zero()) {
    if (n_ < 1) throw MatrixShapeError("matrix size must be >= 1");
  }

  static Matrix identity(int n) {
    Matrix m(n);
    for (int i = 0; i < n; ++i) m.at(i, i) = coeff<T>::one();
    return m;
  }
  static Matrix diagonal(const std::vector<T>& diag) {
    Matrix m(static_cast<int>(diag.size()));
    for (int i = 0; i < m.n; ++i) m.at(i, i) = diag[i];
    return m;
  }

  T& at(int i, int j) { return e[static_cast<size_t>(i) * n + j]; }
  const T& at(int i, int j) const { return e[static_cast<size_t>(i) * n + j]; }

  bool is_zero() const {
    for (const auto& x : e)
      if (!coeff<T>::is_zero(x)) return false;
    return true;
  }

  Matrix operator+(const Matrix& o) const {
    check(o);
    Matrix r = *this;
    for (size_t i = 0; i < e.size(); ++i) r.e[i] = coeff<T>::add(r.e[i], o.e[i]);
    return r;
  }
  Matrix operator-() const {
    Matrix r = *this;
    for (auto& x : r.e) x = coeff<T>::neg(x);
    return r;
  }
  Matrix operator-(const Matrix& o) const { return *this + (-o); }

  Matrix operator*(const Matrix& o) const {
    check(o);
    Matrix r(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        if (coeff<T>::is_zero(at(i, k))) continue;
        for (int j = 0; j < n; ++j)
          r.at(i, j) = coeff<T>::add(r.at(i, j), coeff<T>::mul(at(i, k), o.at(k, j)));
      }
    return r;
  }

  Matrix scaled(const T& c) const {
    Matrix r(n);
    for (size_t i = 0; i < e.size(); ++i) r.e[i] = coeff<T>::mul(e[i], c);
    return r;
  }

  T trace() const {
    T t = coeff<T>::zero();
    for (int i = 0; i < n; ++i) t = coeff<T>::add(t, at(i, i));
    return t;
  }

  bool operator==(const Matrix& o) const {
    if (n != o.n) return false;
    for (size_t i = 0; i < e.size(); ++i) {
      // symmetric-difference zero test avoids requiring operator== on T
      if (!coeff<T>::is_zero(coeff<T>::add(e[i], coeff<T>::neg(o.e[i])))) return false;
    }
    return true;
  }

 private:
  void check(const Matrix& o) const {
    if (n != o.n) throw MatrixShapeError("matrix size mismatch");
  }
};

template <class R>
using FormMatrix = Matrix<Form<R>>;

/// Entrywise exterior derivative.
template <class R>
FormMatrix<R> d(const FormMatrix<R>& m) {
  FormMatrix<R> r(m.n);
  for (size_t i = 0; i < m.e.size(); ++i) r.e[i] = d(m.e[i]);
  return r;
}

namespace detail {

template <class R>
bool entries_have_degree(const FormMatrix<R>& m, int deg) {
  for (const auto& f : m.e) {
    int dd = -1;
    if (!f.is_zero() && (!f.is_homogeneous(&dd) || dd != deg)) return false;
  }
  return true;
}

}  // namespace detail

/// Curvature of a matrix of connection 1-forms.
template <class R>
FormMatrix<R> curvature(const FormMatrix<R>& conn) {
  if (!detail::entries_have_degree(conn, 1))
    throw MatrixShapeError("curvature: connection entries must have degree 1");
  return d(conn) + conn * conn;
}

// ---------------------------------------------------------------------------
// Nilpotent exponentials.

/// exp(nu) for a nilpotent form: terminating Taylor sum.
template <class R>
Form<R> form_exp(const Form<R>& nu) {
  if (!nu.is_nilpotent())
    throw std::invalid_argument("form_exp: argument must have zero scalar part");
  Form<R> acc = Form<R>::scalar(nu.model(), ring<R>::one());
  Form<R> pw = acc;
  const int guard = nu.model() ? nu.model()->max_degree() + 1 : 1;
  for (int k = 1; k <= guard && !pw.is_zero(); ++k)
    acc = acc + (pw = (pw * nu).scaled(ring<R>::from_ratio(1, k)));
  return acc;
}

/// exp(N) for a matrix with nilpotent-form entries.
template <class R>
FormMatrix<R> mat_exp(const FormMatrix<R>& N) {
  FormMatrix<R> acc = FormMatrix<R>::identity(N.n);
  FormMatrix<R> pw = acc;
  int guard = 2;
  for (const auto& f : N.e)
    if (f.model()) guard = std::max(guard, f.model()->max_degree() + 1);
  for (int k = 1; k <= guard && !pw.is_zero(); ++k)
    acc = acc + (pw = (pw * N).scaled(Form<R>::scalar(nullptr, ring<R>::from_ratio(1, k))));
  return acc;
}

// ---------------------------------------------------------------------------
// Gerbe-module surrogates.

template <class R>
struct GerbeModule {
  ModelPtr<R> model;
  int rank = 0;
  Form<R> B;                      // normalized: raw B-field = 2 pi i * B
  std::vector<Form<R>> roots;     // diagonal presentation (empty iff conn set)
  std::optional<FormMatrix<R>> conn;

  bool diagonal() const { return !conn.has_value(); }

  static GerbeModule with_roots(ModelPtr<R> model, Form<R> B,
                                std::vector<Form<R>> roots) {
    GerbeModule m;
    m.model = std::move(model);
    m.rank = static_cast<int>(roots.size());
    m.B = std::move(B);
    m.roots = std::move(roots);
    m.validate();
    return m;
  }
  static GerbeModule with_conn(ModelPtr<R> model, Form<R> B, FormMatrix<R> conn) {
    GerbeModule m;
    m.model = std::move(model);
    m.rank = conn.n;
    m.B = std::move(B);
    m.conn = std::move(conn);
    m.validate();
    return m;
  }

  void validate() const {
    if (rank < 1) throw InvalidModuleError("rank must be >= 1");
    int bd = -1;
    if (!B.is_zero() && (!B.is_homogeneous(&bd) || bd != 2))
      throw InvalidModuleError("B must be an even 2-form");
    auto even_nilpotent = [](const Form<R>& f) {
      int p = -1;
      return f.is_zero() ||
             (f.has_pure_parity(&p) && p == 0 && f.is_nilpotent());
    };
    for (const auto& r : roots)
      if (!even_nilpotent(r))
        throw InvalidModuleError("curvature roots must be even nilpotent forms");
    if (conn && !detail::entries_have_degree(*conn, 1))
      throw InvalidModuleError("connection entries must have degree 1");
    if (conn) {
      auto F = hf::curvature(*conn);
      for (const auto& f : F.e)
        if (!even_nilpotent(f))
          throw InvalidModuleError("curvature entries must be even nilpotent");
    }
  }

  /// Normalized curvature matrix F_n (raw curvature = 2 pi i * F_n).
  FormMatrix<R> curvature_matrix() const {
    if (conn) return hf::curvature(*conn);
    FormMatrix<R> m(rank);
    for (int i = 0; i < rank; ++i) m.at(i, i) = roots[i];
    return m;
  }
};

/// Block-diagonal direct sum (roots concatenate; B must agree).
template <class R>
GerbeModule<R> direct_sum(const GerbeModule<R>& a, const GerbeModule<R>& b) {
  if (!a.diagonal() || !b.diagonal())
    throw InvalidModuleError("direct_sum: diagonal presentations only");
  if (!(a.B == b.B)) throw InvalidModuleError("direct_sum: B mismatch");
  std::vector<Form<R>> roots = a.roots;
  roots.insert(roots.end(), b.roots.begin(), b.roots.end());
  return GerbeModule<R>::with_roots(a.model, a.B, std::move(roots));
}

// ---------------------------------------------------------------------------
// Twisted Chern characters.

/// e^{-2 pi i m B} (Tr e^{-2 pi i F^E} - Tr e^{-2 pi i F^{E'}}), all data in
/// the normalized ("Chern root") convention.
template <class R>
Form<R> twisted_chern(const GerbeModule<R>& E, const GerbeModule<R>& Ep, int m) {
  if (E.rank != Ep.rank) throw InvalidModuleError("twisted_chern: rank mismatch");
  if (!(E.B == Ep.B)) throw InvalidModuleError("twisted_chern: B mismatch");
  const R c = ring<R>::minus_2pii();
  auto tr_exp = [&](const GerbeModule<R>& M) {
    return mat_exp(M.curvature_matrix().scaled(Form<R>::scalar(nullptr, c))).trace();
  };
  Form<R> pre = form_exp(E.B.scaled(c * ring<R>::from_int(m)));
  return pre * (tr_exp(E) - tr_exp(Ep));
}

template <class R>
struct AnomalyReport {
  Form<R> ch2, ch4;
  bool vanishes = false;
};

/// Degree-2 and degree-4 parts of the level-1 twisted Chern character; the
/// Jacobi-form theorems apply exactly when both vanish.
template <class R>
AnomalyReport<R> anomaly(const GerbeModule<R>& E, const GerbeModule<R>& Ep) {
  Form<R> ch = twisted_chern(E, Ep, 1);
  AnomalyReport<R> rep;
  rep.ch2 = degree_component(ch, 2);
  rep.ch4 = degree_component(ch, 4);
  rep.vanishes = rep.ch2.max_abs_coeff() < 1e-12 && rep.ch4.max_abs_coeff() < 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Odd case: gauge paths and the odd Chern character.

template <class R>
struct GaugePath {
  GerbeModule<R> base;     // conn presentation
  FormMatrix<R> A_phi;     // degree-1 entries, constant along the path

  static GaugePath make(GerbeModule<R> base, FormMatrix<R> A_phi) {
    if (base.diagonal())
      throw InvalidModuleError("gauge path needs a connection presentation");
    if (A_phi.n != base.rank) throw MatrixShapeError("A_phi size mismatch");
    if (!detail::entries_have_degree(A_phi, 1))
      throw InvalidModuleError("A_phi entries must have degree 1");
    return {std::move(base), std::move(A_phi)};
  }

  /// Curvature of conn + s A_phi as a polynomial in s: F0 + s F1 + s^2 F2.
  std::array<FormMatrix<R>, 3> curvature_spoly() const {
    const auto& c = *base.conn;
    return {hf::curvature(c), d(A_phi) + c * A_phi + A_phi * c, A_phi * A_phi};
  }
};

namespace detail {

/// Multiplies two polynomials in s with matrix coefficients.
template <class T>
std::vector<Matrix<T>> spoly_mul(const std::vector<Matrix<T>>& a,
                                 const std::vector<Matrix<T>>& b) {
  std::vector<Matrix<T>> r(a.size() + b.size() - 1, Matrix<T>(a[0].n));
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero()) continue;
    for (size_t j = 0; j < b.size(); ++j) r[i + j] = r[i + j] + a[i] * b[j];
  }
  while (r.size() > 1 && r.back().is_zero()) r.pop_back();
  return r;
}

template <class T>
bool spoly_is_zero(const std::vector<Matrix<T>>& a) {
  for (const auto& m : a)
    if (!m.is_zero()) return false;
  return true;
}

}  // namespace detail

/// Integrand of the odd Chern character, Tr[A_phi exp(-2 pi i F(s))], as an
/// exact polynomial in s with Form coefficients.
template <class R>
std::vector<Form<R>> odd_chern_integrand(const GaugePath<R>& path) {
  auto fs = path.curvature_spoly();
  const R c = ring<R>::minus_2pii();
  auto cs = Form<R>::scalar(nullptr, c);
  std::vector<FormMatrix<R>> arg{fs[0].scaled(cs), fs[1].scaled(cs), fs[2].scaled(cs)};
  std::vector<FormMatrix<R>> acc{FormMatrix<R>::identity(path.A_phi.n)};
  std::vector<FormMatrix<R>> pw = acc;
  const int guard = path.base.model->max_degree() + 1;
  for (int k = 1; k <= guard; ++k) {
    pw = detail::spoly_mul(pw, arg);
    if (detail::spoly_is_zero(pw)) break;
    auto inv_k = Form<R>::scalar(nullptr, ring<R>::from_ratio(1, k));
    if (acc.size() < pw.size()) acc.resize(pw.size(), FormMatrix<R>(path.A_phi.n));
    for (size_t j = 0; j < pw.size(); ++j) acc[j] = acc[j] + pw[j].scaled(inv_k);
  }
  std::vector<Form<R>> out;
  out.reserve(acc.size());
  for (const auto& m : acc) out.push_back((path.A_phi * m).trace());
  return out;
}

template <class R>
struct OddChern {
  Form<R> full, ch1, ch3;
};

/// -e^{-2 pi i m B} * integral_0^1 Tr[A_phi exp(-2 pi i F(s))] ds with the
/// s-integration done exactly on the polynomial integrand.
template <class R>
OddChern<R> odd_chern(const GaugePath<R>& path, int m) {
  auto poly = odd_chern_integrand(path);
  Form<R> integral(path.base.model);
  for (size_t j = 0; j < poly.size(); ++j)
    integral = integral + poly[j].scaled(ring<R>::from_ratio(1, static_cast<long>(j) + 1));
  Form<R> pre =
      form_exp(path.base.B.scaled(ring<R>::minus_2pii() * ring<R>::from_int(m)));
  Form<R> full = -(pre * integral);
  return {full, degree_component(full, 1), degree_component(full, 3)};
}

/// Numeric cross-check of the exact s-integration: 8-node Gauss-Legendre
/// quadrature of the same polynomial integrand.
inline Form<Cx> odd_chern_quadrature(const GaugePath<Cx>& path, int m) {
  static const double node[4] = {0.1834346424956498, 0.5255324099163290,
                                 0.7966664774136267, 0.9602898564975363};
  static const double wt[4] = {0.3626837833783620, 0.3137066458778873,
                               0.2223810344533745, 0.1012285362903763};
  auto poly = odd_chern_integrand(path);
  Form<Cx> integral(path.base.model);
  for (int g = 0; g < 8; ++g) {
    double x = g < 4 ? 0.5 * (1.0 - node[g]) : 0.5 * (1.0 + node[g - 4]);
    double w = 0.5 * wt[g % 4];
    Form<Cx> at(path.base.model);
    double sp = 1.0;
    for (const auto& c : poly) {
      at = at + c.scaled(Cx{sp, 0.0});
      sp *= x;
    }
    integral = integral + at.scaled(Cx{w, 0.0});
  }
  Form<Cx> pre = form_exp(
      path.base.B.scaled(ring<Cx>::minus_2pii() * ring<Cx>::from_int(m)));
  return -(pre * integral);
}

// ---------------------------------------------------------------------------
// Holomorphic functional calculus at finite rank.  A function is carried as
// its jet about the evaluation point: jet[k] = f^{(k)}(z)/k!, with scalar
// (numeric), series, or Form-valued-series coefficients.

/// Jet of a scalar (q,y)-series about z: jet[k] = dz^k(s)/k!.
template <class C>
std::vector<QYSeries<C>> series_jet(const QYSeries<C>& s, int order) {
  std::vector<QYSeries<C>> jet{s};
  for (int k = 1; k <= order; ++k)
    jet.push_back(coeff<QYSeries<C>>::div_int(dz(jet.back()), k));
  return jet;
}

/// Sum_k jet[k] nu^k for a nilpotent even form nu; the series analogue of a
/// Taylor shift (theta_shifted is the special case f = theta).
template <class R>
QYSeries<Form<R>> apply_jet(const std::vector<QYSeries<R>>& jet, const Form<R>& nu) {
  int parity = 0;
  if (!nu.is_nilpotent() || (!nu.has_pure_parity(&parity) || parity != 0))
    throw InvalidShiftError("jet shift must be an even nilpotent form");
  Form<R> pw = Form<R>::scalar(nu.model(), ring<R>::one());
  QYSeries<Form<R>> acc = lift_scaled(jet[0], pw);
  for (size_t k = 1; k < jet.size(); ++k) {
    pw = pw * nu;
    if (pw.is_zero()) break;
    acc = acc + lift_scaled(jet[k], pw);
  }
  return acc;
}

/// Numeric counterpart: jet[k] = f^{(k)}(z)/k! as complex numbers.
inline Form<Cx> apply_jet_numeric(const std::vector<Cx>& jet, const Form<Cx>& nu) {
  int parity = 0;
  if (!nu.is_nilpotent() || (!nu.has_pure_parity(&parity) || parity != 0))
    throw InvalidShiftError("jet shift must be an even nilpotent form");
  Form<Cx> pw = Form<Cx>::scalar(nu.model(), ring<Cx>::one());
  Form<Cx> acc = pw.scaled(jet[0]);
  for (size_t k = 1; k < jet.size(); ++k) {
    pw = pw * nu;
    if (pw.is_zero()) break;
    acc = acc + pw.scaled(jet[k]);
  }
  return acc;
}

/// Constant series with a single Form coefficient.
template <class R>
QYSeries<Form<R>> series_const_form(const Form<R>& f) {
  auto s = coeff<QYSeries<Form<R>>>::zero();
  s.set(0, 0, f);
  return s;
}

/// f(z I + N) = Sum_k jet[k] N^k for a matrix N of nilpotent even forms,
/// entries promoted to Form-valued series.
template <class R>
Matrix<QYSeries<Form<R>>> holo_apply(const std::vector<QYSeries<R>>& jet,
                                     const FormMatrix<R>& N) {
  using S = QYSeries<Form<R>>;
  Matrix<S> lifted(N.n);
  for (size_t i = 0; i < N.e.size(); ++i) {
    int par = 0;
    if (!N.e[i].is_zero() &&
        (!N.e[i].is_nilpotent() || !N.e[i].has_pure_parity(&par) || par != 0))
      throw InvalidShiftError("holo_apply: remainder must be even nilpotent");
    lifted.e[i] = series_const_form(N.e[i]);
  }
  auto lift = [&](const QYSeries<R>& s) {
    return lift_scaled(s, Form<R>::scalar(nullptr, ring<R>::one()));
  };
  Matrix<S> acc = Matrix<S>::identity(N.n).scaled(lift(jet[0]));
  Matrix<S> pw = Matrix<S>::identity(N.n);
  for (size_t k = 1; k < jet.size(); ++k) {
    pw = pw * lifted;
    if (pw.is_zero()) break;
    acc = acc + pw.scaled(lift(jet[k]));
  }
  return acc;
}

namespace detail {

/// trace(log(I + K)) for a matrix of series with nilpotent coefficients.
template <class T>
T trace_log_one_plus(const Matrix<T>& K) {
  T acc = coeff<T>::zero();
  Matrix<T> pw = Matrix<T>::identity(K.n);
  const int guard = 2 * K.n + 66;
  for (int k = 1; k <= guard; ++k) {
    pw = pw * K;
    if (pw.is_zero()) break;
    T term = coeff<T>::div_int(pw.trace(), k);
    if (k % 2 == 0) term = coeff<T>::neg(term);
    acc = coeff<T>::add(acc, term);
  }
  return acc;
}

}  // namespace detail

/// det(f(z I + N_num)) / det(f(z I + N_den)) by exp(trace(log)) — equal ranks
/// make the f(z)^N factors cancel, so only the unipotent parts matter.
template <class R>
QYSeries<Form<R>> det_holo(const std::vector<QYSeries<R>>& jet,
                           const FormMatrix<R>& Nnum, const FormMatrix<R>& Nden) {
  using S = QYSeries<Form<R>>;
  if (Nnum.n != Nden.n) throw MatrixShapeError("det_holo: rank mismatch");
  QYSeries<R> f0inv = series_inv(jet[0]);
  S lf0inv = lift_scaled(f0inv, Form<R>::scalar(nullptr, ring<R>::one()));
  auto unipotent_log = [&](const FormMatrix<R>& N) {
    Matrix<S> U = holo_apply(jet, N).scaled(lf0inv);
    Matrix<S> K = U - Matrix<S>::identity(N.n);
    return detail::trace_log_one_plus(K);
  };
  return series_exp(unipotent_log(Nnum) - unipotent_log(Nden));
}

/// Root-product evaluation of the same determinant for diagonal data.
template <class R>
QYSeries<Form<R>> det_holo_diag(const std::vector<QYSeries<R>>& jet,
                                const std::vector<Form<R>>& num,
                                const std::vector<Form<R>>& den) {
  if (num.size() != den.size()) throw MatrixShapeError("det_holo_diag: rank mismatch");
  auto r = coeff<QYSeries<Form<R>>>::one();
  for (const auto& nu : num) r = series_mul(r, apply_jet(jet, nu));
  for (const auto& nu : den) r = series_mul(r, series_inv(apply_jet(jet, nu)));
  return r;
}

}  // namespace hf
