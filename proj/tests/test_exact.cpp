#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "horiforge/exact.hpp"

using namespace hf;

TEST_CASE("GaussRat arithmetic") {
  GaussRat a(Rat(1, 2), Rat(3));
  GaussRat b(Rat(-2), Rat(1, 3));
  auto s = a + b;
  CHECK(s.re == Rat(-3, 2));
  CHECK(s.im == Rat(10, 3));
  // (1/2 + 3i)(-2 + i/3) = -1 - i/6 - 6i + i^2 = -2 - 37i/6... check directly
  auto p = a * b;
  CHECK(p.re == Rat(1, 2) * Rat(-2) - Rat(3) * Rat(1, 3));
  CHECK(p.im == Rat(1, 2) * Rat(1, 3) + Rat(3) * Rat(-2));
  auto ai = a.inv();
  auto id = a * ai;
  CHECK(id.re == 1);
  CHECK(id.im == 0);
}

TEST_CASE("GaussRat zero inverse throws") {
  CHECK_THROWS_AS(GaussRat{}.inv(), std::domain_error);
}

TEST_CASE("Exact pi bookkeeping") {
  Exact x = Exact::pi(2) * Exact(3) + Exact::from_ratio(1, 4);
  Exact y = Exact::pi(-1) * Exact::i();
  Exact p = x * y;
  // 3 pi^2 * i/pi = 3i pi ; (1/4)(i/pi) = i/(4 pi)
  CHECK(p.terms().size() == 2);
  CHECK(p.terms().at(1) == GaussRat(0, 3));
  CHECK(p.terms().at(-1) == GaussRat(0, Rat(1, 4)));
  CHECK((x - x).is_zero());
}

TEST_CASE("Exact inversion only for monomials") {
  Exact m = Exact::pi(3) * Exact::from_ratio(-2, 7);
  CHECK(m * m.inv() == Exact(1));
  Exact sum = Exact(1) + Exact::pi();
  CHECK_THROWS_AS(sum.inv(), std::domain_error);
  CHECK_THROWS_AS(Exact().inv(), std::domain_error);
}

TEST_CASE("Exact to_complex") {
  Exact x = Exact::pi() * Exact(2) + Exact::i();
  Cx v = x.to_complex();
  CHECK(std::abs(v - Cx{2 * std::numbers::pi, 1.0}) < 1e-15);
}

TEST_CASE("ring trait dz factors agree numerically") {
  for (int y2 : {-3, -1, 0, 1, 2, 5}) {
    Cx exact = ring<Exact>::dz_factor(y2).to_complex();
    Cx dbl = ring<Cx>::dz_factor(y2);
    CHECK(std::abs(exact - dbl) < 1e-14);
  }
  CHECK(std::abs(ring<Exact>::minus_2pii().to_complex() - ring<Cx>::minus_2pii()) < 1e-14);
}
