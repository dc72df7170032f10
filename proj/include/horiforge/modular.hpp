#pragma once

#include <random>
#include <vector>

#include "horiforge/theta.hpp"

namespace hf {

struct SingularPointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModularMatrix {
  long a, b, c, d;

  ModularMatrix(long a_, long b_, long c_, long d_) : a(a_), b(b_), c(c_), d(d_) {
    if (a * d - b * c != 1)
      throw std::invalid_argument("modular matrix must have determinant 1");
  }

  static ModularMatrix identity() { return {1, 0, 0, 1}; }
  static ModularMatrix S() { return {0, -1, 1, 0}; }
  static ModularMatrix T() { return {1, 1, 0, 1}; }

  ModularMatrix operator*(const ModularMatrix& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d};
  }
  bool operator==(const ModularMatrix&) const = default;
};

enum class SubgroupId { SL2Z, Gamma0_2, Gamma_upper0_2, GammaTheta };

inline const char* subgroup_name(SubgroupId g) {
  switch (g) {
    case SubgroupId::SL2Z: return "SL2Z";
    case SubgroupId::Gamma0_2: return "Gamma0(2)";
    case SubgroupId::Gamma_upper0_2: return "Gamma^0(2)";
    case SubgroupId::GammaTheta: return "GammaTheta";
  }
  return "?";
}

/// (z, tau) -> (z/(c tau + d), (a tau + b)/(c tau + d)).
inline std::pair<Cx, Cx> act(const ModularMatrix& g, Cx z, Cx tau) {
  Cx den = static_cast<double>(g.c) * tau + static_cast<double>(g.d);
  return {z / den, (static_cast<double>(g.a) * tau + static_cast<double>(g.b)) / den};
}

inline bool membership(const ModularMatrix& g, SubgroupId grp) {
  auto even = [](long x) { return x % 2 == 0; };
  switch (grp) {
    case SubgroupId::SL2Z:
      return true;
    case SubgroupId::Gamma0_2:
      return even(g.c);
    case SubgroupId::Gamma_upper0_2:
      return even(g.b);
    case SubgroupId::GammaTheta:
      // congruent to I or to the antidiagonal swap mod 2
      return (even(g.b) && even(g.c)) || (even(g.a) && even(g.d));
  }
  return false;
}

inline std::vector<ModularMatrix> generators(SubgroupId grp) {
  const auto S = ModularMatrix::S();
  const auto T = ModularMatrix::T();
  switch (grp) {
    case SubgroupId::SL2Z:
      return {S, T};
    case SubgroupId::Gamma0_2:
      return {T, S * T * T * S * T};  // T, ST^2ST
    case SubgroupId::Gamma_upper0_2:
      return {S * T * S, T * T * S * T * S};  // STS, T^2STS
    case SubgroupId::GammaTheta:
      return {S, T * T};
  }
  return {};
}

struct LatticeShift {
  long lambda, mu;
};

struct JacobiSpec {
  int weight = 0;
  int index = 0;
  SubgroupId group = SubgroupId::SL2Z;
};

namespace detail {

inline Cx int_pow(Cx base, int e) {
  if (e < 0) return 1.0 / int_pow(base, -e);
  Cx r{1.0, 0.0};
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

inline double value_diff(Cx a, Cx b) { return std::abs(a - b); }
inline double value_diff(const Form<Cx>& a, const Form<Cx>& b) {
  return (a - b).max_abs_coeff();
}
inline Cx scale_value(Cx v, Cx s) { return v * s; }
inline Form<Cx> scale_value(const Form<Cx>& v, Cx s) { return v.scaled(s); }

}  // namespace detail

/// |f(gamma.(z,tau)) - (c tau + d)^s e^{2 pi i l c z^2/(c tau + d)} f(z,tau)|.
/// For Form-valued f the residual is the max over basis coefficients.
template <class F>
double jacobi_residual(F&& f, const JacobiSpec& spec, const ModularMatrix& g, Cx z,
                       Cx tau) {
  Cx den = static_cast<double>(g.c) * tau + static_cast<double>(g.d);
  if (std::abs(den) < 1e-10) throw SingularPointError("c tau + d vanished");
  auto [zg, taug] = act(g, z, tau);
  Cx auto_fac = detail::int_pow(den, spec.weight) *
                std::exp(Cx{0, 2 * std::numbers::pi} *
                         (static_cast<double>(spec.index) * static_cast<double>(g.c) *
                          z * z / den));
  return detail::value_diff(f(zg, taug), detail::scale_value(f(z, tau), auto_fac));
}

/// |f(z + la tau + mu, tau) - e^{-2 pi i l(la^2 tau + 2 la z)} f(z,tau)|.
template <class F>
double jacobi_residual(F&& f, const JacobiSpec& spec, const LatticeShift& s, Cx z,
                       Cx tau) {
  double la = static_cast<double>(s.lambda);
  Cx shift_fac = std::exp(Cx{0, -2 * std::numbers::pi} *
                          static_cast<double>(spec.index) * (la * la * tau + 2.0 * la * z));
  return detail::value_diff(f(z + la * tau + static_cast<double>(s.mu), tau),
                            detail::scale_value(f(z, tau), shift_fac));
}

/// Draws (z, tau) in the admissible region; same box as the theta sampling.
inline std::pair<Cx, Cx> draw_jacobi_sample(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(0.8, 1.25), ths(-0.2, 0.2), re(-0.4, 0.4),
      im(-0.3, 0.3);
  Cx tau = Cx{0, t(rng)} * std::exp(Cx{0, ths(rng)});
  return {Cx{re(rng), im(rng)}, tau};
}

/// Max residual over the group's generators and the lattice generators at
/// n random samples; singular points are redrawn (at most 20 retries each).
template <class F>
double jacobi_max_residual(F&& f, const JacobiSpec& spec, int n_samples,
                           std::mt19937_64& rng, bool include_lattice = true) {
  double worst = 0;
  auto gens = generators(spec.group);
  for (int i = 0; i < n_samples; ++i) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 20)
        throw SingularPointError("resampling budget exhausted");
      auto [z, tau] = draw_jacobi_sample(rng);
      try {
        double r = 0;
        for (const auto& g : gens) r = std::max(r, jacobi_residual(f, spec, g, z, tau));
        if (include_lattice) {
          r = std::max(r, jacobi_residual(f, spec, LatticeShift{1, 0}, z, tau));
          r = std::max(r, jacobi_residual(f, spec, LatticeShift{0, 1}, z, tau));
        }
        worst = std::max(worst, r);
        break;
      } catch (const SingularPointError&) {
        continue;  // isolated singular point: redraw
      }
    }
  }
  return worst;
}

}  // namespace hf
