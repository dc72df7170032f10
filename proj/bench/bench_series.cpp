// Compares the OpenMP series product against the serial reference on dense
// random operands.  Usage: bench_series [q_order8] [y_window2] [reps]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "horiforge/qyseries.hpp"

using namespace hf;

namespace {

QYSeries<Cx> random_series(int q8, int win2, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  QYSeries<Cx> s(q8, -win2, win2);
  for (int q = 0; q <= q8; ++q)
    for (int y = -win2; y <= win2; ++y) s.set(q, y, Cx{c(rng), c(rng)});
  return s;
}

template <class F>
double time_ms(F&& f, int reps) {
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  const int q8 = argc > 1 ? std::atoi(argv[1]) : 96;
  const int win2 = argc > 2 ? std::atoi(argv[2]) : 24;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 3;

  std::mt19937_64 rng(7);
  auto a = random_series(q8, win2, rng);
  auto b = random_series(q8, win2, rng);
  std::printf("operands: %zu x %zu terms, %d threads\n", a.terms.size(),
              b.terms.size(), omp_get_max_threads());

  QYSeries<Cx> r_serial, r_par;
  double ms_serial = time_ms([&] { r_serial = series_mul_serial(a, b); }, reps);
  double ms_par = time_ms([&] { r_par = series_mul(a, b); }, reps);

  double diff = r_serial.max_abs_diff(r_par);
  std::printf("serial:   %10.2f ms\n", ms_serial);
  std::printf("parallel: %10.2f ms  (speedup %.2fx)\n", ms_par,
              ms_serial / ms_par);
  std::printf("max |serial - parallel| = %g\n", diff);
  return diff < 1e-12 ? 0 : 1;
}
