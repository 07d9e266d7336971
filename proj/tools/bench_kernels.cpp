// Timing comparison of the OpenMP kernels against their serial reference
// twins. Prints one CSV row per (kernel, size): serial ms, parallel ms,
// speedup, and the max absolute deviation between the two results (which
// must be exactly zero for kron/map and ~1e-15 for the trace reductions).

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "odb/kernels.hpp"

using odb::fock::cmat;
using odb::fock::cplx;

namespace {

using clock_t_ = std::chrono::steady_clock;

double ms_since(clock_t_::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_t_::now() - t0).count();
}

cmat random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  cmat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

}  // namespace

int main() {
  std::mt19937_64 rng(42);
  std::printf("kernel,size,serial_ms,parallel_ms,speedup,max_dev\n");

  // kron output is n^2 x n^2, so keep n modest or the bench swaps
  for (int n : {16, 32, 48}) {
    const cmat a = random_matrix(n, rng), b = random_matrix(n, rng);
    auto t0 = clock_t_::now();
    cmat ks = odb::kern::kron_serial(a, b);
    const double ts = ms_since(t0);
    t0 = clock_t_::now();
    cmat kp = odb::kern::kron(a, b);
    const double tp = ms_since(t0);
    std::printf("kron,%d,%.3f,%.3f,%.2f,%.3e\n", n, ts, tp, ts / tp,
                (ks - kp).cwiseAbs().maxCoeff());
  }

  for (int count : {64, 128}) {
    const int n = 64;
    std::vector<cmat> lefts, rights;
    for (int i = 0; i < count; ++i) {
      lefts.push_back(random_matrix(n, rng));
      rights.push_back(random_matrix(n, rng));
    }
    auto t0 = clock_t_::now();
    cmat gs = odb::kern::pairwise_traces_serial(lefts, rights);
    const double ts = ms_since(t0);
    t0 = clock_t_::now();
    cmat gp = odb::kern::pairwise_traces(lefts, rights);
    const double tp = ms_since(t0);
    std::printf("pairwise_traces,%d,%.3f,%.3f,%.2f,%.3e\n", count, ts, tp, ts / tp,
                (gs - gp).cwiseAbs().maxCoeff());
  }

  for (int count : {32, 64}) {
    const int n = 96;
    auto job = [&](int i) {
      cmat m = cmat::Constant(n, n, cplx(double(i), 0.0));
      return (m * m).eval();
    };
    auto t0 = clock_t_::now();
    auto vs = odb::kern::map_indexed_serial(count, job);
    const double ts = ms_since(t0);
    t0 = clock_t_::now();
    auto vp = odb::kern::map_indexed(count, job);
    const double tp = ms_since(t0);
    double dev = 0.0;
    for (int i = 0; i < count; ++i)
      dev = std::max(dev, (vs[(size_t)i] - vp[(size_t)i]).cwiseAbs().maxCoeff());
    std::printf("map_indexed,%d,%.3f,%.3f,%.2f,%.3e\n", count, ts, tp, ts / tp, dev);
  }
  return 0;
}
