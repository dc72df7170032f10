#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "horiforge/forms.hpp"

using namespace hf;

namespace {

// Sullivan-style model of a circle bundle over T^2 for reuse below:
// x1, x2, A of degree 1 with dA = F = x1 x2.
struct T2Bundle {
  std::shared_ptr<ModelAlgebra<Exact>> M;
  Form<Exact> x1, x2, A, F;
  explicit T2Bundle(int maxdeg = 4) {
    M = ModelAlgebra<Exact>::create(maxdeg);
    int i1 = M->add_generator("x1", 1);
    int i2 = M->add_generator("x2", 1);
    int ia = M->add_generator("A", 1);
    x1 = Form<Exact>::generator(M, i1);
    x2 = Form<Exact>::generator(M, i2);
    A = Form<Exact>::generator(M, ia);
    F = x1 * x2;
    M->set_differential(ia, F);
    M->validate();
  }
};

}  // namespace

TEST_CASE("Koszul signs and odd squares") {
  T2Bundle b;
  CHECK(b.x2 * b.x1 == -(b.x1 * b.x2));
  CHECK((b.x1 * b.x1).is_zero());
  CHECK((b.x1 * b.x2 * b.x1).is_zero());
  // even generators commute with everything
  auto M = ModelAlgebra<Exact>::create(6);
  int iu = M->add_generator("u", 2);
  int ix = M->add_generator("x", 1);
  auto u = Form<Exact>::generator(M, iu);
  auto x = Form<Exact>::generator(M, ix);
  CHECK(u * x == x * u);
  CHECK_FALSE((u * u).is_zero());
}

TEST_CASE("degree truncation") {
  T2Bundle b(2);
  CHECK((b.x1 * b.x2 * b.A).is_zero());  // degree 3 > maxdeg 2
  CHECK_FALSE((b.x1 * b.x2).is_zero());
}

TEST_CASE("scalar forms work without a model") {
  Form<Exact> one = Form<Exact>::scalar(nullptr, Exact(1));
  Form<Exact> two = one + one;
  CHECK(two.scalar_part() == Exact(2));
  T2Bundle b;
  // model-free scalar combines with model-bound forms
  auto s = two * b.x1;
  CHECK(s == b.x1 + b.x1);
  CHECK(s.model() == b.M);
}

TEST_CASE("model mismatch is rejected") {
  T2Bundle b1, b2;
  CHECK_THROWS_AS(b1.x1 * b2.x2, ModelMismatchError);
  CHECK_THROWS_AS(b1.x1 + b2.x2, ModelMismatchError);
}

TEST_CASE("Leibniz rule on generators") {
  T2Bundle b;
  // d(x1 A) = d(x1) A - x1 dA = -x1 F = -x1 x1 x2 = 0
  CHECK(d(b.x1 * b.A).is_zero());
  // d(A x1) = F x1 - A*0 = F x1
  CHECK(d(b.A * b.x1) == b.F * b.x1);
  // sign: d(x1 * A) uses (-1)^{deg x1} on the second slot
  Form<Exact> lhs = d(b.x2 * b.A);
  CHECK(lhs == -(b.x2 * b.F));
}

TEST_CASE("d squares to zero on random elements") {
  auto M = ModelAlgebra<Exact>::create(6);
  int ix = M->add_generator("x", 1);
  int iy = M->add_generator("y", 1);
  int it = M->add_generator("t", 1);
  int iu = M->add_generator("u", 2);
  int iv = M->add_generator("v", 3);
  auto x = Form<Exact>::generator(M, ix);
  auto y = Form<Exact>::generator(M, iy);
  auto t = Form<Exact>::generator(M, it);
  auto u = Form<Exact>::generator(M, iu);
  M->set_differential(iu, x * y * t);  // du = xyt, closed
  // d(u^2) = 2xytu != 0, so u^2 is not a valid differential for v
  M->set_differential(iv, u * u);
  CHECK_THROWS_AS(M->validate(), std::invalid_argument);
  M->set_differential(iv, x * y * u);  // d(xyu) = xy*xyt = 0
  M->validate();
  auto v = Form<Exact>::generator(M, iv);

  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> coef(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    Form<Exact> f = Form<Exact>::scalar(M, Exact(coef(rng)));
    f = f + x.scaled(Exact(coef(rng))) + y.scaled(Exact(coef(rng)));
    f = f + u.scaled(Exact(coef(rng))) + v.scaled(Exact(coef(rng)));
    f = f + (x * u).scaled(Exact(coef(rng))) + (y * v).scaled(Exact(coef(rng)));
    f = f + (x * y * u).scaled(Exact(coef(rng)));
    CHECK(d(d(f)).is_zero());
  }
}

TEST_CASE("degree helpers") {
  T2Bundle b;
  Form<Exact> f = Form<Exact>::scalar(b.M, Exact(2)) + b.F;
  CHECK(f.min_degree() == 0);
  CHECK(f.max_term_degree() == 2);
  CHECK_FALSE(f.is_homogeneous());
  int p = -1;
  CHECK(f.has_pure_parity(&p));
  CHECK(p == 0);
  CHECK(degree_component(f, 2) == b.F);
  CHECK(degree_component(f, 1).is_zero());
  int dg = -1;
  CHECK(b.F.is_homogeneous(&dg));
  CHECK(dg == 2);
  Form<Exact> mixed = b.x1 + b.F;
  CHECK_FALSE(mixed.has_pure_parity());
}

TEST_CASE("inverse of unit plus nilpotent") {
  T2Bundle b(6);
  Form<Exact> one = Form<Exact>::scalar(b.M, Exact(1));
  Form<Exact> g = Form<Exact>::scalar(b.M, Exact(3)) + b.F + (b.F * b.A * b.x1).scaled(Exact::from_ratio(1, 2));
  CHECK(g * g.inv() == one);
  CHECK(g.inv() * g == one);
  // purely nilpotent forms are not invertible
  CHECK_THROWS_AS(b.F.inv(), std::domain_error);
  CHECK(b.F.is_nilpotent());
  CHECK_FALSE(g.is_nilpotent());
}

TEST_CASE("twisted differential") {
  auto M = ModelAlgebra<Exact>::create(8);
  int ix = M->add_generator("x", 1);
  int ih = M->add_generator("h", 3);
  int iu = M->add_generator("u", 2);
  M->validate();
  auto x = Form<Exact>::generator(M, ix);
  auto h = Form<Exact>::generator(M, ih);
  auto u = Form<Exact>::generator(M, iu);

  // d_H = d + mH obeys d_H^2 = 0 for closed H
  for (int m : {-2, 1, 3}) {
    Form<Exact> f = x + u * x + Form<Exact>::scalar(M, Exact(5));
    CHECK(twisted_d(m, h, twisted_d(m, h, f)).is_zero());
  }
  // flux validation
  CHECK_THROWS_AS(twisted_d(1, u, x), InvalidFluxError);          // wrong degree
  CHECK_THROWS_AS(twisted_d(1, h + u, x), InvalidFluxError);      // not pure
  int iw = M->add_generator("w", 3);
  M->set_differential(iw, u * u);
  auto w = Form<Exact>::generator(M, iw);
  CHECK_THROWS_AS(twisted_d(1, w, x), InvalidFluxError);           // dw != 0
  CHECK(twisted_d(0, h, x) == d(x));
}

TEST_CASE("generator bookkeeping errors") {
  auto M = ModelAlgebra<Exact>::create(3);
  M->add_generator("a", 1);
  CHECK_THROWS_AS(M->add_generator("a", 2), std::invalid_argument);
  CHECK_THROWS_AS(M->add_generator("z", 0), std::invalid_argument);
  CHECK_THROWS_AS(ModelAlgebra<Exact>::create(0), std::invalid_argument);
  CHECK(M->index_of("a") == 0);
  CHECK(M->index_of("missing") == -1);
}
