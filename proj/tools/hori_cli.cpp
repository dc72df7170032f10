#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <random>

#include "horiforge/modelfile.hpp"
#include "horiforge/report.hpp"
#include "horiforge/witten.hpp"

using namespace hf;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Opts {
  std::string model, kind = "all", degrees, what, mrange = "-8..8";
  double tol = 1e-8;
  bool tol_set = false;
  unsigned long long seed = 1;
  bool exact = false, json = false;
  int y_window = 8;
  int samples = 0;  // 0 = per-suite default
  int q_order = 0;  // 0 = per-suite default
};

double pick_tol(const Opts& o, double suite_default) {
  return o.tol_set ? o.tol : suite_default;
}
int pick_samples(const Opts& o, int suite_default) {
  return o.samples > 0 ? o.samples : suite_default;
}
int pick_q_order(const Opts& o, int suite_default) {
  return o.q_order > 0 ? o.q_order : suite_default;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }
};

const std::vector<ThetaKind> kAllKinds{ThetaKind::Theta, ThetaKind::Theta1,
                                       ThetaKind::Theta2, ThetaKind::Theta3};

std::vector<ThetaKind> kinds_from(const std::string& s) {
  if (s.empty() || s == "all") return kAllKinds;
  if (s == "theta") return {ThetaKind::Theta};
  if (s == "theta1") return {ThetaKind::Theta1};
  if (s == "theta2") return {ThetaKind::Theta2};
  if (s == "theta3") return {ThetaKind::Theta3};
  throw UsageError("unknown kind '" + s + "' (theta|theta1|theta2|theta3|all)");
}

std::pair<int, int> parse_m_range(const std::string& s) {
  try {
    auto dots = s.find("..");
    if (dots == std::string::npos) {
      int m = std::stoi(s);
      return {m, m};
    }
    int lo = std::stoi(s.substr(0, dots));
    int hi = std::stoi(s.substr(dots + 2));
    if (lo > hi) throw UsageError("empty m-range '" + s + "'");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("bad m-range '" + s + "' (expected <m> or <lo>..<hi>)");
  }
}

std::vector<int> parse_degrees(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string piece;
  while (std::getline(in, piece, ',')) {
    try {
      out.push_back(std::stoi(piece));
    } catch (const std::logic_error&) {
      throw UsageError("bad degree list '" + s + "'");
    }
  }
  if (out.empty()) throw UsageError("empty degree list");
  return out;
}

std::string frac_str(int num, int den) {
  if (num == 0) return "0";
  int g = std::gcd(std::abs(num), den);
  num /= g;
  den /= g;
  std::string s = std::to_string(num);
  if (den != 1) s += "/" + std::to_string(den);
  return s;
}

std::string fmt_exact(const Exact& e) {
  if (e.is_zero()) return "0";
  const auto& t = e.terms();
  if (t.size() == 1 && t.begin()->first == 0) {
    const GaussRat& g = t.begin()->second;
    std::ostringstream os;
    if (g.re != 0 || g.im == 0) os << g.re;
    if (g.im != 0) {
      if (g.re != 0 && g.im > 0) os << "+";
      os << g.im << "i";
    }
    return os.str();
  }
  return e.str();  // pi powers fall back to the verbose form
}

// -----------------------------------------------------------------------
// theta-laws

CheckReport run_theta_laws(const Opts& o) {
  CheckReport rep;
  rep.suite = "theta-laws";
  std::mt19937_64 rng(o.seed);
  const int n = pick_samples(o, 100);
  struct L {
    ThetaLaw law;
    const char* name;
    bool deriv;
  };
  const L laws[] = {{ThetaLaw::TShift, "t-shift", false},
                    {ThetaLaw::SInversion, "s-inversion", false},
                    {ThetaLaw::ZPlusOne, "z-plus-one", false},
                    {ThetaLaw::ZPlusTau, "z-plus-tau", false},
                    {ThetaLaw::DerivativeT, "t-shift", true},
                    {ThetaLaw::DerivativeS, "s-inversion", true}};
  for (const auto& l : laws)
    for (auto kind : kAllKinds) {
      Timer t;
      std::string name = std::string(l.deriv ? "derivative/" : "scalar/") +
                         theta_name(kind) + "/" + l.name;
      double worst = 0;
      bool exhausted = false;
      for (int i = 0; i < n && !exhausted; ++i) {
        for (int attempt = 0;; ++attempt) {
          if (attempt >= 20) {
            exhausted = true;
            break;
          }
          auto [v, tau] = draw_jacobi_sample(rng);
          try {
            worst = std::max(worst, theta_transform_residual(kind, l.law, v, tau));
            break;
          } catch (const SamplingError&) {
            continue;
          }
        }
      }
      if (exhausted)
        rep.add({name, CheckStatus::Skipped, 0, 0, t.ms(),
                 "resampling budget exhausted"});
      else
        rep.add(name, worst, pick_tol(o, l.deriv ? 1e-8 : 1e-9), t.ms());
    }
  return rep;
}

// -----------------------------------------------------------------------
// jacobi-calibrate

CheckReport run_jacobi_calibrate(const Opts& o) {
  CheckReport rep;
  rep.suite = "jacobi-calibrate";
  std::mt19937_64 rng(o.seed);

  {
    Timer t;
    auto one = [](Cx, Cx) { return Cx{1.0, 0.0}; };
    double r = jacobi_max_residual(one, JacobiSpec{0, 0, SubgroupId::SL2Z},
                                   pick_samples(o, 50), rng);
    rep.add("constant/sl2z", r, pick_tol(o, 1e-12), t.ms());
  }

  auto ratio = [](Cx z, Cx tau) {
    Cx den = theta_numeric(ThetaKind::Theta, z, tau);
    if (std::abs(den) < 1e-10) throw SingularPointError("theta zero");
    return theta_numeric(ThetaKind::Theta1, z, tau) / den;
  };
  JacobiSpec spec{0, 0, SubgroupId::Gamma0_2};
  {
    Timer t;
    auto ratio4 = [&](Cx z, Cx tau) {
      Cx r = ratio(z, tau);
      return r * r * r * r;
    };
    double r = jacobi_max_residual(ratio4, spec, pick_samples(o, 60), rng);
    rep.add("theta-ratio4/gamma0-2", r, pick_tol(o, 1e-8), t.ms());
  }
  {
    // character control: the unpowered ratio carries an order-4 character
    // under the second Gamma0(2) generator, so its residual must blow up
    Timer t;
    auto gens = generators(SubgroupId::Gamma0_2);
    double worst = 0;
    for (int i = 0; i < pick_samples(o, 25); ++i) {
      for (int attempt = 0;; ++attempt) {
        if (attempt >= 20) break;
        auto [z, tau] = draw_jacobi_sample(rng);
        try {
          worst = std::max(worst, jacobi_residual(ratio, spec, gens[1], z, tau));
          break;
        } catch (const SingularPointError&) {
          continue;
        }
      }
    }
    rep.add({"theta-ratio1/character-control",
             worst > 1e-3 ? CheckStatus::Pass : CheckStatus::Fail, worst, 1e-3,
             t.ms(), "negative control: residual must exceed the tolerance"});
  }
  return rep;
}

// -----------------------------------------------------------------------
// hori-demo / chain-check / euler-check

template <class R>
const TDualPair<R>& require_pair(const ParsedModel<R>& pm) {
  if (!pm.pair)
    throw UsageError("model file declares no dual pair (two bundle stanzas needed)");
  return *pm.pair;
}

template <class R>
void hori_demo_impl(const Opts& o, CheckReport& rep) {
  auto pm = load_model_file<R>(o.model);
  const auto& P = require_pair(pm);
  const double tol = std::is_same_v<R, Exact> ? 0.0 : pick_tol(o, 1e-8);
  {
    Timer t;
    double r = (fiber_integrate(P.H, P.iA) - P.Fhat).max_abs_coeff();
    rep.add("flux/h-pushforward", r, tol, t.ms());
  }
  {
    Timer t;
    double r = (fiber_integrate(P.Hhat, P.iAhat) - P.F).max_abs_coeff();
    rep.add("flux/hhat-pushforward", r, tol, t.ms());
  }
  {
    Timer t;
    double r = (P.Hhat - P.H - d(P.A() * P.Ahat())).max_abs_coeff();
    rep.add("flux/gauge-difference", r, tol, t.ms());
  }
  std::mt19937_64 rng(o.seed);
  const int n = pick_samples(o, 25);
  Timer t;
  double wc = 0, we = 0;
  for (int i = 0; i < n; ++i) {
    int m = static_cast<int>(rng() % 17) - 8;
    bool fwd = rng() % 2 == 0;
    auto w = random_invariant_form(rng, P, fwd);
    wc = std::max(wc, chain_residual(m, w, P, fwd).max_abs_coeff());
    we = std::max(we, euler_residual_level(m, w, P, fwd).max_abs_coeff());
  }
  rep.add("hori/chain-samples", wc, tol, t.ms() / 2);
  rep.add("hori/euler-samples", we, tol, t.ms() / 2);
}

template <class R>
void chain_check_impl(const Opts& o, CheckReport& rep) {
  auto pm = load_model_file<R>(o.model);
  const auto& P = require_pair(pm);
  const double tol = std::is_same_v<R, Exact> ? 0.0 : pick_tol(o, 1e-8);
  auto [lo, hi] = parse_m_range(o.mrange);
  const int n = pick_samples(o, 40);
  std::mt19937_64 rng(o.seed);
  for (int m = lo; m <= hi; ++m) {
    Timer t;
    double worst = 0;
    for (int i = 0; i < n; ++i)
      for (bool fwd : {true, false}) {
        auto w = random_invariant_form(rng, P, fwd);
        worst = std::max(worst, chain_residual(m, w, P, fwd).max_abs_coeff());
      }
    char name[16];
    std::snprintf(name, sizeof name, "m=%+03d", m);
    rep.add(name, worst, tol, t.ms());
  }
}

template <class R>
void euler_check_impl(const Opts& o, CheckReport& rep) {
  auto pm = load_model_file<R>(o.model);
  const auto& P = require_pair(pm);
  const double tol = std::is_same_v<R, Exact> ? 0.0 : pick_tol(o, 1e-8);
  auto [lo, hi] = parse_m_range(o.mrange);
  const int n = pick_samples(o, 40);
  std::mt19937_64 rng(o.seed);
  for (int m = lo; m <= hi; ++m) {
    Timer t;
    double worst = 0, winv = 0;
    for (int i = 0; i < n; ++i)
      for (bool fwd : {true, false}) {
        auto w = random_invariant_form(rng, P, fwd);
        worst = std::max(worst,
                         euler_residual_level(m, w, P, fwd).max_abs_coeff());
        if (m != 0) {
          // explicit inverse on the m != 0 eigenspace: (-1/m) dual o hori = id
          auto back = hori_level(m, hori_level(m, w, P, fwd), P, !fwd)
                          .scaled(ring<R>::from_ratio(-1, m));
          winv = std::max(winv, (back - w).max_abs_coeff());
        }
      }
    char name[24];
    std::snprintf(name, sizeof name, "euler/m=%+03d", m);
    rep.add(name, worst, tol, t.ms());
    if (m != 0) {
      std::snprintf(name, sizeof name, "inverse/m=%+03d", m);
      rep.add(name, winv, tol, 0.0);
    }
  }
}

// -----------------------------------------------------------------------
// witten-identity / witten-jacobi

template <class R>
std::pair<const GerbeModule<R>*, const GerbeModule<R>*> require_module_pair(
    const ParsedModel<R>& pm) {
  if (pm.modules.size() < 2)
    throw UsageError("model must declare two module stanzas (E, then E')");
  return {&pm.modules[0].second, &pm.modules[1].second};
}

template <class R>
void witten_identity_impl(const Opts& o, CheckReport& rep) {
  auto pm = load_model_file<R>(o.model);
  auto [E, Ep] = require_module_pair(pm);
  const int N = pick_q_order(o, 8);
  const int W = o.y_window;
  // compute with q/y slack, compare on the restricted box: the theta
  // inverse's q^{-1/8} head contaminates the top q-level, and truncated
  // y-tails feed back under the series inverses
  const int q8 = 8 * N + 8, win = W + 2 * N + 2;
  for (auto kind : kinds_from(o.kind)) {
    Timer t;
    auto lhs = witten_capital(kind, *E, *Ep, q8, -win, win).restricted(8 * N, -W, W);
    auto rhs = theta_det_form(kind, *E, *Ep, q8, -win, win).restricted(8 * N, -W, W);
    double r = lhs.max_abs_diff(rhs) / std::max(1.0, rhs.max_abs());
    rep.add(std::string("central-identity/") + theta_name(kind), r,
            std::is_same_v<R, Exact> ? 0.0 : pick_tol(o, 1e-8), t.ms());
  }
}

void witten_jacobi_run(const Opts& o, CheckReport& rep) {
  auto pm = load_model_file<Cx>(o.model);
  auto [E, Ep] = require_module_pair(pm);
  auto degrees = parse_degrees(o.degrees.empty() ? "0,2,4" : o.degrees);
  const int n = pick_samples(o, 8);
  std::mt19937_64 rng(o.seed);
  for (auto kind : kinds_from(o.kind)) {
    std::string base = theta_name(kind);
    Timer t;
    try {
      auto v = witten_jacobi_check(kind, *E, *Ep, degrees, n, rng);
      if (v.refused) {
        rep.add({base + "/gate", CheckStatus::Refused, 0, 0, t.ms(),
                 "anomaly ch2/ch4 nonzero: theorem hypothesis violated"});
        continue;
      }
      for (const auto& [p, r] : v.residuals)
        rep.add(base + "/p=" + std::to_string(p), r, pick_tol(o, 1e-7), t.ms());
    } catch (const SingularPointError& e) {
      rep.add({base, CheckStatus::Skipped, 0, 0, t.ms(), e.what()});
    }
  }
}

// -----------------------------------------------------------------------
// deri-check (built-in instances)

CheckReport run_deri_check(const Opts& o) {
  CheckReport rep;
  rep.suite = "deri-check";

  {
    auto M = ModelAlgebra<Exact>::create(6);
    int iu = M->add_generator("u", 2);
    int iv = M->add_generator("v", 2);
    M->validate();
    auto u = Form<Exact>::generator(M, iu);
    auto v = Form<Exact>::generator(M, iv);
    auto E = GerbeModule<Exact>::with_roots(M, v, {u});
    auto Ep = GerbeModule<Exact>::with_roots(M, v, {Form<Exact>(M)});
    for (auto kind : kAllKinds) {
      Timer t;
      auto r = deri_residual(kind, E, Ep, 24, -16, 16).restricted(16, -4, 4);
      rep.add(std::string("exact-rank1/") + theta_name(kind), r.max_abs(), 0.0,
              t.ms());
    }
  }

  {
    // small-amplitude roots: the rounding floor of the residual scales
    // cubically with the root amplitude and grows with the q-order, so the
    // N_q = 8 run needs tighter normalization than the unit-scale instance
    auto M = ModelAlgebra<Cx>::create(6);
    int ix1 = M->add_generator("x1", 1);
    int ix2 = M->add_generator("x2", 1);
    int iu = M->add_generator("u", 2);
    int iv = M->add_generator("v", 2);
    M->validate();
    auto x1 = Form<Cx>::generator(M, ix1);
    auto x2 = Form<Cx>::generator(M, ix2);
    auto u = Form<Cx>::generator(M, iu);
    auto v = Form<Cx>::generator(M, iv);
    auto E = GerbeModule<Cx>::with_roots(
        M, u.scaled(0.05), {v.scaled(0.05), (u + x1 * x2).scaled(0.05)});
    auto Ep = GerbeModule<Cx>::with_roots(M, u.scaled(0.05),
                                          {Form<Cx>(M), u.scaled(0.1)});
    const int N = pick_q_order(o, 8);
    const int W = std::min(o.y_window, 6);
    const int q8 = 8 * N + 8, win = W + 2 * N + 2;
    for (auto kind : kAllKinds) {
      Timer t;
      auto r = deri_residual(kind, E, Ep, q8, -win, win).restricted(8 * N, -W, W);
      rep.add(std::string("rank2/") + theta_name(kind), r.max_abs(),
              pick_tol(o, 1e-9), t.ms());
    }
  }
  return rep;
}

// -----------------------------------------------------------------------
// odd-jacobi (built-in instances)

CheckReport run_odd_jacobi(const Opts& o) {
  CheckReport rep;
  rep.suite = "odd-jacobi";
  // dw = w x1 keeps Tr[A_phi] and w dw zero simultaneously, so the odd
  // anomaly gate holds for A_phi = diag(w, -w); dwp = v breaks it
  auto M = ModelAlgebra<Cx>::create(6);
  int ix1 = M->add_generator("x1", 1);
  int iv = M->add_generator("v", 2);
  int iw = M->add_generator("w", 1);
  int iwp = M->add_generator("wp", 1);
  auto x1 = Form<Cx>::generator(M, ix1);
  auto v = Form<Cx>::generator(M, iv);
  auto w = Form<Cx>::generator(M, iw);
  auto wp = Form<Cx>::generator(M, iwp);
  M->set_differential(iw, w * x1);
  M->set_differential(iwp, v);
  M->validate();
  auto base = GerbeModule<Cx>::with_conn(M, Form<Cx>(M), FormMatrix<Cx>(2));

  std::mt19937_64 rng(o.seed);
  const int n = pick_samples(o, 6);
  const std::vector<int> degrees{1, 3};

  auto gated = GaugePath<Cx>::make(base, FormMatrix<Cx>::diagonal({w, -w}));
  for (auto kind : kinds_from(o.kind)) {
    Timer t;
    try {
      auto vd = odd_jacobi_check(kind, gated, degrees, n, rng);
      if (vd.refused) {
        rep.add({std::string("gated/") + theta_name(kind), CheckStatus::Refused,
                 0, 0, t.ms(), "odd anomaly nonzero"});
        continue;
      }
      for (const auto& [p, r] : vd.residuals)
        rep.add(std::string("gated/") + theta_name(kind) + "/p=" +
                    std::to_string(p),
                r, pick_tol(o, 1e-7), t.ms());
    } catch (const SingularPointError& e) {
      rep.add({std::string("gated/") + theta_name(kind), CheckStatus::Skipped, 0,
               0, t.ms(), e.what()});
    }
  }

  auto bad = GaugePath<Cx>::make(base, FormMatrix<Cx>::diagonal({wp, -wp}));
  {
    Timer t;
    auto vb = odd_jacobi_check(ThetaKind::Theta, bad, {3}, n, rng);
    rep.add({"control/refusal",
             vb.refused ? CheckStatus::Refused : CheckStatus::Fail, 0, 0, t.ms(),
             vb.refused ? "anomalous instance refused, as required"
                        : "anomalous instance was not refused"});
  }
  {
    Timer t;
    auto res = odd_jacobi_residuals(ThetaKind::Theta, bad, {3}, n, rng);
    rep.add({"control/forced", res.at(3) > 1e-3 ? CheckStatus::Pass
                                                : CheckStatus::Fail,
             res.at(3), 1e-3, t.ms(),
             "negative control: residual must exceed the tolerance"});
  }
  return rep;
}

// -----------------------------------------------------------------------
// expand

int run_expand(const Opts& o) {
  const int N = pick_q_order(o, 16);
  const int W = o.y_window;
  QYSeries<Exact> s;
  auto theta_like = [&](ThetaKind k, bool prime) {
    auto t = theta_series<Exact>(k, 8 * N, -W, W);
    return prime ? dz(t) : t;
  };
  const std::string& w = o.what;
  if (w == "theta") s = theta_like(ThetaKind::Theta, false);
  else if (w == "theta1") s = theta_like(ThetaKind::Theta1, false);
  else if (w == "theta2") s = theta_like(ThetaKind::Theta2, false);
  else if (w == "theta3") s = theta_like(ThetaKind::Theta3, false);
  else if (w == "theta-prime") s = theta_like(ThetaKind::Theta, true);
  else if (w == "theta1-prime") s = theta_like(ThetaKind::Theta1, true);
  else if (w == "theta2-prime") s = theta_like(ThetaKind::Theta2, true);
  else if (w == "theta3-prime") s = theta_like(ThetaKind::Theta3, true);
  else if (w == "sinh") s = sinh_series<Exact>(8 * N, -W, W);
  else if (w == "cosh") s = cosh_series<Exact>(8 * N, -W, W);
  else
    throw UsageError("unknown expand target '" + w +
                     "' (theta|theta1|theta2|theta3|*-prime|sinh|cosh)");

  if (o.json) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [k, c] : s.terms)
      terms.push_back({{"q", frac_str(k.q8, 8)},
                       {"y", frac_str(k.y2, 2)},
                       {"coeff", fmt_exact(c)}});
    nlohmann::json j{{"what", w},
                     {"q_order", N},
                     {"y_window", W},
                     {"terms", std::move(terms)}};
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& [k, c] : s.terms)
      std::cout << "q^" << frac_str(k.q8, 8) << " y^" << frac_str(k.y2, 2) << " "
                << fmt_exact(c) << "\n";
  }
  return 0;
}

int emit(const CheckReport& rep, const Opts& o) {
  if (o.json)
    std::cout << rep.to_json().dump(2) << "\n";
  else
    std::cout << rep.text();
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("HORIFORGE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) omp_set_num_threads(std::min(n, omp_get_max_threads()));
  }

  CLI::App app{"horiforge: verification harness for graded Hori maps, theta "
               "identities, and Witten-module generating functions"};
  app.require_subcommand(1);
  app.fallthrough();
  Opts o;
  auto* tol_opt = app.add_option("--tol", o.tol, "residual tolerance override");
  app.add_option("--seed", o.seed, "random seed (runs are deterministic given it)");
  app.add_flag("--exact", o.exact, "exact coefficient ring where available");
  app.add_flag("--json", o.json, "machine-readable report");
  app.add_option("--y-window", o.y_window,
                 "y-truncation half-window, in units of y^(1/2)");
  app.add_option("--samples", o.samples, "random samples per check");
  app.add_option("--q-order", o.q_order, "q-truncation order N_q");

  auto* c_theta = app.add_subcommand("theta-laws", "all 24 transformation laws");
  auto* c_cal = app.add_subcommand("jacobi-calibrate", "modular calibration runs");
  auto* c_demo = app.add_subcommand("hori-demo", "flux relations and example maps");
  auto* c_chain = app.add_subcommand("chain-check", "level-m chain-map property");
  auto* c_euler = app.add_subcommand("euler-check", "Euler identity and inverse");
  auto* c_wid = app.add_subcommand("witten-identity", "central determinant identity");
  auto* c_wjac = app.add_subcommand("witten-jacobi", "even-case Jacobi verdicts");
  auto* c_deri = app.add_subcommand("deri-check", "deri-theta identities");
  auto* c_ojac = app.add_subcommand("odd-jacobi", "odd-case Jacobi verdicts");
  auto* c_exp = app.add_subcommand("expand", "coefficient dump");

  for (auto* c : {c_demo, c_chain, c_euler, c_wid, c_wjac})
    c->add_option("--model", o.model, "model file")->required();
  for (auto* c : {c_wid, c_wjac, c_ojac})
    c->add_option("--kind", o.kind, "theta|theta1|theta2|theta3|all");
  c_wjac->add_option("--degrees", o.degrees, "comma-separated even degrees");
  for (auto* c : {c_chain, c_euler})
    c->add_option("--m", o.mrange, "level range <lo>..<hi>");
  c_exp->add_option("--what", o.what, "expansion target")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  o.tol_set = tol_opt->count() > 0;

  try {
    if (app.got_subcommand(c_exp)) return run_expand(o);

    CheckReport rep;
    if (app.got_subcommand(c_theta)) {
      rep = run_theta_laws(o);
    } else if (app.got_subcommand(c_cal)) {
      rep = run_jacobi_calibrate(o);
    } else if (app.got_subcommand(c_deri)) {
      rep = run_deri_check(o);
    } else if (app.got_subcommand(c_ojac)) {
      rep = run_odd_jacobi(o);
    } else if (app.got_subcommand(c_demo)) {
      rep.suite = "hori-demo";
      o.exact ? hori_demo_impl<Exact>(o, rep) : hori_demo_impl<Cx>(o, rep);
    } else if (app.got_subcommand(c_chain)) {
      rep.suite = "chain-check";
      o.exact ? chain_check_impl<Exact>(o, rep) : chain_check_impl<Cx>(o, rep);
    } else if (app.got_subcommand(c_euler)) {
      rep.suite = "euler-check";
      o.exact ? euler_check_impl<Exact>(o, rep) : euler_check_impl<Cx>(o, rep);
    } else if (app.got_subcommand(c_wid)) {
      rep.suite = "witten-identity";
      o.exact ? witten_identity_impl<Exact>(o, rep)
              : witten_identity_impl<Cx>(o, rep);
    } else if (app.got_subcommand(c_wjac)) {
      rep.suite = "witten-jacobi";
      witten_jacobi_run(o, rep);
    }
    return emit(rep, o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
