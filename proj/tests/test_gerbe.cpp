#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "horiforge/gerbe.hpp"

using namespace hf;

namespace {

// base model: two odd 1-forms, two closed 2-forms, a non-closed 1-form a
// with da = u
template <class R>
struct Playground {
  std::shared_ptr<ModelAlgebra<R>> M;
  int ix1, ix2, iu, iv, ia;
  Form<R> x1, x2, u, v, a;

  explicit Playground(int maxdeg = 6) {
    M = ModelAlgebra<R>::create(maxdeg);
    ix1 = M->add_generator("x1", 1);
    ix2 = M->add_generator("x2", 1);
    iu = M->add_generator("u", 2);
    iv = M->add_generator("v", 2);
    ia = M->add_generator("a", 1);
    x1 = Form<R>::generator(M, ix1);
    x2 = Form<R>::generator(M, ix2);
    u = Form<R>::generator(M, iu);
    v = Form<R>::generator(M, iv);
    a = Form<R>::generator(M, ia);
    M->set_differential(ia, u);
    M->validate();
  }

  Form<R> random_pure(std::mt19937_64& rng, int deg) {
    std::uniform_int_distribution<int> c(-4, 4);
    Form<R> f(M);
    auto pick = [&](const Form<R>& g) { return g.scaled(ring<R>::from_int(c(rng))); };
    if (deg == 1) return pick(x1) + pick(x2) + pick(a);
    if (deg == 2) return pick(u) + pick(v) + pick(x1 * x2) + pick(x1 * a);
    if (deg == 3) return pick(x1 * u) + pick(x2 * v) + pick(x1 * x2 * a);
    return Form<R>(M);
  }
};

}  // namespace

TEST_CASE("matrix algebra basics") {
  Playground<Exact> P;
  auto I3 = FormMatrix<Exact>::identity(3);
  CHECK(I3.trace() == Form<Exact>::scalar(nullptr, Exact(3)));
  CHECK_THROWS_AS(FormMatrix<Exact>(2) * FormMatrix<Exact>(3), MatrixShapeError);

  // graded trace: trace(ab) = (-1)^{|a||b|} trace(ba)
  std::mt19937_64 rng(5);
  for (int da = 1; da <= 3; ++da)
    for (int db = 1; db <= 3; ++db) {
      FormMatrix<Exact> A(2), B(2);
      for (int i = 0; i < 4; ++i) {
        A.e[i] = P.random_pure(rng, da);
        B.e[i] = P.random_pure(rng, db);
      }
      Form<Exact> lhs = (A * B).trace();
      Form<Exact> rhs = (B * A).trace();
      if (da % 2 == 1 && db % 2 == 1) rhs = -rhs;
      CHECK((lhs - rhs).is_zero());
    }
}

TEST_CASE("entrywise d satisfies the matrix Leibniz rule") {
  Playground<Exact> P;
  std::mt19937_64 rng(7);
  for (int da = 1; da <= 2; ++da) {
    FormMatrix<Exact> A(2), B(2);
    for (int i = 0; i < 4; ++i) {
      A.e[i] = P.random_pure(rng, da);
      B.e[i] = P.random_pure(rng, 2);
    }
    auto dAB = d(A * B);
    auto sgn = Form<Exact>::scalar(nullptr, Exact(da % 2 == 0 ? 1 : -1));
    auto rhs = d(A) * B + (A * d(B)).scaled(sgn);
    CHECK((dAB - rhs).is_zero());
  }
}

TEST_CASE("curvature and Bianchi") {
  Playground<Exact> P;
  FormMatrix<Exact> zero1(1);
  CHECK(curvature(zero1).is_zero());

  FormMatrix<Exact> c1(1);
  c1.at(0, 0) = P.a;
  CHECK(curvature(c1).at(0, 0) == P.u);

  CHECK_THROWS_AS(curvature(FormMatrix<Exact>::diagonal({P.u})), MatrixShapeError);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 15; ++t) {
    FormMatrix<Exact> conn(2);
    for (int i = 0; i < 4; ++i) conn.e[i] = P.random_pure(rng, 1);
    auto F = curvature(conn);
    auto bianchi = d(F) + conn * F - F * conn;
    CHECK(bianchi.is_zero());
  }
}

TEST_CASE("nilpotent exponentials") {
  Playground<Exact> P(4);
  auto nu = P.u + P.x1 * P.x2;
  auto half = Exact::from_ratio(1, 2);
  CHECK(form_exp(nu) == Form<Exact>::scalar(P.M, Exact(1)) + nu + (nu * nu).scaled(half));
  CHECK_THROWS_AS(form_exp(Form<Exact>::scalar(P.M, Exact(1))), std::invalid_argument);

  FormMatrix<Exact> N(2);
  N.at(0, 1) = P.u;
  N.at(1, 0) = P.v;
  auto E = mat_exp(N);
  // N^2 = diag(uv, vu), N^3 has degree 6 > 4
  CHECK(E.at(0, 0) == Form<Exact>::scalar(P.M, Exact(1)) + (P.u * P.v).scaled(half));
  CHECK(E.at(0, 1) == P.u);
}

TEST_CASE("twisted chern character") {
  Playground<Exact> P;
  auto zeroB = Form<Exact>(P.M);
  auto E0 = GerbeModule<Exact>::with_roots(P.M, zeroB, {zeroB});
  auto Ex = GerbeModule<Exact>::with_roots(P.M, zeroB, {P.u});

  CHECK(twisted_chern(Ex, Ex, 3).is_zero());

  // rank 1, B = 0, root u vs 0: e^{-2 pi i u} - 1
  auto ch = twisted_chern(Ex, E0, 0);
  auto c = ring<Exact>::minus_2pii();
  auto expect = form_exp(P.u.scaled(c)) - Form<Exact>::scalar(P.M, Exact(1));
  CHECK(ch == expect);
  // degree-2 component proportional to Tr[F - F']
  CHECK(degree_component(ch, 2) == P.u.scaled(c));

  // additivity under direct sum
  auto Ey = GerbeModule<Exact>::with_roots(P.M, zeroB, {P.v});
  auto lhs = twisted_chern(direct_sum(Ex, Ey), direct_sum(E0, E0), 2);
  auto rhs = twisted_chern(Ex, E0, 2) + twisted_chern(Ey, E0, 2);
  CHECK(lhs == rhs);

  // twist enters through B
  auto B = P.u;
  auto EB = GerbeModule<Exact>::with_roots(P.M, B, {P.v});
  auto E0B = GerbeModule<Exact>::with_roots(P.M, B, {zeroB});
  CHECK(twisted_chern(EB, E0B, 1) ==
        form_exp(B.scaled(c)) * (form_exp(P.v.scaled(c)) - Form<Exact>::scalar(P.M, Exact(1))));

  CHECK_THROWS_AS(twisted_chern(Ex, direct_sum(E0, E0), 0), InvalidModuleError);
  CHECK_THROWS_AS(twisted_chern(EB, E0, 0), InvalidModuleError);
}

TEST_CASE("anomaly predicate") {
  Playground<Exact> P;
  auto zeroB = Form<Exact>(P.M);
  auto x = P.x1 * P.x2;  // decomposable: x /\ x = 0
  auto Epair = GerbeModule<Exact>::with_roots(P.M, zeroB, {x, -x});
  auto E0 = GerbeModule<Exact>::with_roots(P.M, zeroB, {zeroB, zeroB});

  auto same = anomaly(Epair, Epair);
  CHECK(same.vanishes);

  auto rep = anomaly(Epair, E0);
  CHECK(rep.ch2.is_zero());
  CHECK(rep.ch4.is_zero());
  CHECK(rep.vanishes);

  auto bad = anomaly(GerbeModule<Exact>::with_roots(P.M, zeroB, {P.u}),
                     GerbeModule<Exact>::with_roots(P.M, zeroB, {zeroB}));
  CHECK_FALSE(bad.vanishes);
  CHECK(bad.ch2 == P.u.scaled(ring<Exact>::minus_2pii()));
}

TEST_CASE("module validation") {
  Playground<Exact> P;
  auto zeroB = Form<Exact>(P.M);
  CHECK_THROWS_AS(GerbeModule<Exact>::with_roots(P.M, P.x1, {zeroB}),
                  InvalidModuleError);
  CHECK_THROWS_AS(GerbeModule<Exact>::with_roots(P.M, zeroB, {P.x1}),
                  InvalidModuleError);
  CHECK_THROWS_AS(
      GerbeModule<Exact>::with_roots(P.M, zeroB,
                                     {Form<Exact>::scalar(P.M, Exact(1))}),
      InvalidModuleError);
}

TEST_CASE("odd chern character") {
  Playground<Exact> P;
  auto zeroB = Form<Exact>(P.M);
  FormMatrix<Exact> conn0(2);
  auto base = GerbeModule<Exact>::with_conn(P.M, zeroB, conn0);

  auto none = odd_chern(GaugePath<Exact>::make(base, FormMatrix<Exact>(2)), 1);
  CHECK(none.full.is_zero());

  // ch1 is -Tr[A_phi] regardless of the path curvature
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    FormMatrix<Exact> conn(2), Aphi(2);
    for (int i = 0; i < 4; ++i) {
      conn.e[i] = P.random_pure(rng, 1);
      Aphi.e[i] = P.random_pure(rng, 1);
    }
    auto b = GerbeModule<Exact>::with_conn(P.M, P.u + P.v, conn);
    auto oc = odd_chern(GaugePath<Exact>::make(b, Aphi), 2);
    CHECK(oc.ch1 == -Aphi.trace());
  }

  // rank-2 hand oracle: conn = 0, A_phi = diag(a, -a) with da = u.
  // F(s) = s dA_phi + s^2 A_phi^2 = s diag(u, -u); integrand degree-3 part is
  // -2 pi i s Tr[diag(a,-a)diag(u,-u)] = -4 pi i s (a u), so
  // ch3 = -(-4 pi i /2) a u = 2 pi i a u.
  FormMatrix<Exact> Aphi = FormMatrix<Exact>::diagonal({P.a, -P.a});
  auto oc = odd_chern(GaugePath<Exact>::make(base, Aphi), 0);
  CHECK(oc.ch1.is_zero());
  CHECK(oc.ch3 == (P.a * P.u).scaled(Exact(GaussRat(0, 2), 1)));
}

TEST_CASE("exact s-integration agrees with Gauss-Legendre quadrature") {
  Playground<Cx> P;
  std::mt19937_64 rng(17);
  for (int t = 0; t < 5; ++t) {
    FormMatrix<Cx> conn(2), Aphi(2);
    for (int i = 0; i < 4; ++i) {
      conn.e[i] = P.random_pure(rng, 1);
      Aphi.e[i] = P.random_pure(rng, 1);
    }
    auto b = GerbeModule<Cx>::with_conn(P.M, P.u, conn);
    auto path = GaugePath<Cx>::make(b, Aphi);
    auto exact = odd_chern(path, 1).full;
    auto quad = odd_chern_quadrature(path, 1);
    CHECK((exact - quad).max_abs_coeff() <
          1e-12 * std::max(1.0, exact.max_abs_coeff()));
  }
}

// ---------------------------------------------------------------------------
// Functional calculus.

TEST_CASE("holo_apply with a constant-coefficient exp jet") {
  Playground<Exact> P(4);
  auto cjet = [](long num, long den) {
    return QYSeries<Exact>::constant(Exact::from_ratio(num, den), 64, -8, 8);
  };
  std::vector<QYSeries<Exact>> expjet{cjet(1, 1), cjet(1, 1), cjet(1, 2), cjet(1, 6)};
  FormMatrix<Exact> N(2);
  N.at(0, 1) = P.u;
  N.at(1, 0) = P.v;
  auto applied = holo_apply(expjet, N);
  auto expect = mat_exp(N);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK((applied.at(i, j).get(0, 0) - expect.at(i, j)).is_zero());

  // zero remainder reproduces f(z) I
  auto id = holo_apply(expjet, FormMatrix<Exact>(2));
  CHECK((id.at(0, 0).get(0, 0) - Form<Exact>::scalar(nullptr, Exact(1))).is_zero());
  CHECK(id.at(0, 1).is_zero());

  CHECK_THROWS_AS(holo_apply(expjet, FormMatrix<Exact>::diagonal({P.x1})),
                  InvalidShiftError);
}

TEST_CASE("apply_jet reproduces theta_shifted") {
  Playground<Exact> P(4);
  auto jet = series_jet(theta_series<Exact>(ThetaKind::Theta2, 32, -16, 16), 3);
  auto nu = P.u + P.x1 * P.x2;
  auto a = apply_jet(jet, nu);
  auto b = theta_shifted(ThetaKind::Theta2, nu, 32, -16, 16);
  CHECK(a.max_abs_diff(b) == 0.0);

  // rank-1, nu^2 = 0: exactly two Taylor terms
  auto x = P.x1 * P.x2;  // decomposable, so x*x = 0
  REQUIRE((x * x).is_zero());
  auto two = apply_jet(jet, x);
  auto expect = lift_scaled(jet[0], Form<Exact>::scalar(P.M, Exact(1))) +
                lift_scaled(jet[1], x);
  CHECK(two.max_abs_diff(expect) == 0.0);
}

TEST_CASE("apply_jet is multiplicative on product series") {
  Playground<Exact> P(4);
  auto s1 = theta_series<Exact>(ThetaKind::Theta1, 32, -16, 16);
  auto s2 = theta_series<Exact>(ThetaKind::Theta3, 32, -16, 16);
  auto nu = P.u + P.v;
  auto lhs = apply_jet(series_jet(series_mul(s1, s2), 3), nu);
  auto rhs = series_mul(apply_jet(series_jet(s1, 3), nu),
                        apply_jet(series_jet(s2, 3), nu));
  CHECK(lhs.max_abs_diff(rhs) == 0.0);
}

TEST_CASE("det_holo: trivial ratios") {
  Playground<Exact> P(4);
  auto jet = series_jet(theta_series<Exact>(ThetaKind::Theta, 16, -24, 24), 3);
  FormMatrix<Exact> N = FormMatrix<Exact>::diagonal({P.u, P.v});
  auto one = det_holo(jet, N, N);
  CHECK(one.max_abs_diff(coeff<QYSeries<Form<Exact>>>::one()) == 0.0);

  // rank 1: det is just the ratio of jet applications
  auto r1 = det_holo(jet, FormMatrix<Exact>::diagonal({P.u}),
                     FormMatrix<Exact>::diagonal({Form<Exact>(P.M)}));
  auto direct = series_mul(apply_jet(jet, P.u),
                           series_inv(apply_jet(jet, Form<Exact>(P.M))));
  CHECK(r1.restricted(-6, 6).max_abs_diff(direct.restricted(-6, 6)) == 0.0);
}

TEST_CASE("det_holo: exp-trace-log equals the root product") {
  // the theta inverse starts at q^{-1/8}, so the top q-level of any truncated
  // computation is contaminated; compute with q-slack and compare below it
  Playground<Exact> P(4);
  auto zero = Form<Exact>(P.M);
  for (auto kind : {ThetaKind::Theta, ThetaKind::Theta2}) {
    auto jet = series_jet(theta_series<Exact>(kind, 24, -24, 24), 3);
    std::vector<Form<Exact>> num{P.u, P.v + P.x1 * P.x2};
    std::vector<Form<Exact>> den{zero, P.u.scaled(Exact(2))};
    auto etl = det_holo(jet, FormMatrix<Exact>::diagonal(num),
                        FormMatrix<Exact>::diagonal(den));
    auto prod = det_holo_diag(jet, num, den);
    CHECK(etl.restricted(16, -6, 6).max_abs_diff(prod.restricted(16, -6, 6)) == 0.0);
  }
}
