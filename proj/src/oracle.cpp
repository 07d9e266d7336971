#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "odb/oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "odb/kernels.hpp"

namespace odb::oracle {

bool SpectrumReport::all_within_tol() const {
  for (const auto& e : matched)
    if (!e.matched || e.delta > tolerance) return false;
  return true;
}

double SpectrumReport::worst_delta() const {
  double w = 0.0;
  for (const auto& e : matched)
    w = std::max(w, e.matched ? e.delta : std::numeric_limits<double>::infinity());
  return w;
}

std::vector<cplx> brute_spectrum(const sop::SuperOp& L, int dim_cap) {
  const lapack_int n = (lapack_int)L.mat.rows();
  if (n != L.mat.cols()) throw std::invalid_argument("brute_spectrum: non-square");
  if (n > dim_cap)
    throw std::invalid_argument("brute_spectrum: dimension " + std::to_string(n) +
                                " exceeds cap " + std::to_string(dim_cap));
  cmat A = L.mat;  // zgeev destroys its input
  std::vector<cplx> w((size_t)n);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, A.data(), n,
                                        w.data(), nullptr, 1, nullptr, 1);
  if (info != 0)
    throw std::runtime_error("brute_spectrum: zgeev failed, info=" + std::to_string(info));
  return w;
}

SpectrumReport match_spectrum(const std::vector<std::pair<basis::EigenLabel, cplx>>& analytic,
                              const std::vector<cplx>& numeric, double tol) {
  SpectrumReport rep;
  rep.tolerance = tol;
  rep.matched.resize(analytic.size());
  std::vector<bool> adone(analytic.size(), false), ndone(numeric.size(), false);

  for (size_t round = 0; round < analytic.size(); ++round) {
    // Globally nearest unused pair. Quadratic, but the lists are small.
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    size_t bi = 0, bj = 0;
    bool found = false;
    for (size_t i = 0; i < analytic.size(); ++i) {
      if (adone[i]) continue;
      for (size_t j = 0; j < numeric.size(); ++j) {
        if (ndone[j]) continue;
        const double d = std::abs(analytic[i].second - numeric[j]);
        if (d < best) {
          second = best;
          best = d;
          bi = i;
          bj = j;
          found = true;
        } else if (d < second) {
          second = d;
        }
      }
    }
    if (!found) break;
    adone[bi] = true;
    ndone[bj] = true;
    auto& e = rep.matched[bi];
    e.label = analytic[bi].first;
    e.analytic = analytic[bi].second;
    e.numeric = numeric[bj];
    e.delta = best;
    e.matched = true;
    e.tie = (second - best) <= 1e-12 * std::max(1.0, std::abs(e.analytic));
  }
  for (size_t i = 0; i < analytic.size(); ++i)
    if (!adone[i]) {
      rep.matched[i].label = analytic[i].first;
      rep.matched[i].analytic = analytic[i].second;
      rep.matched[i].delta = std::numeric_limits<double>::infinity();
    }
  for (size_t j = 0; j < numeric.size(); ++j)
    if (!ndone[j]) rep.unmatched_numeric.push_back(numeric[j]);
  return rep;
}

LiouvillianApplier::LiouvillianApplier(const sop::SystemParams& p, int Nc, int Nm) {
  p.validate();
  dim_ = Nc * Nm;
  const cmat idc = cmat::Identity(Nc, Nc), idm = cmat::Identity(Nm, Nm);
  const cmat a = kern::kron(fock::ladder(Nc), idm);
  const cmat b = kern::kron(idc, fock::ladder(Nm));
  H_ = sop::build_hamiltonian(p, Nc, Nm);

  auto add = [&](double rate, const cmat& X) {
    if (rate == 0.0) return;
    channels_.push_back({rate, X, cmat(X.adjoint() * X)});
  };
  add(0.5 * p.kappa, a);
  if (p.variant == sop::Variant::weak) {
    add(0.5 * p.gamma * (p.mbar + 1.0), b);
    add(0.5 * p.gamma * p.mbar, cmat(b.adjoint()));
  } else {
    const cmat na = a.adjoint() * a;
    const cmat B = b - (p.chi / p.nu) * na;
    add(0.5 * p.gamma * (p.mbar + 1.0), B);
    add(0.5 * p.gamma * p.mbar, cmat(B.adjoint()));
    add(sop::dsme_dephasing_rate(p), na);
  }
}

cmat LiouvillianApplier::apply(const cmat& rho, bool adjoint) const {
  if (rho.rows() != dim_ || rho.cols() != dim_)
    throw std::invalid_argument("LiouvillianApplier: dimension mismatch");
  const cplx I(0.0, 1.0);
  cmat out = (adjoint ? I : -I) * (H_ * rho - rho * H_);
  for (const auto& ch : channels_) {
    if (adjoint)
      out += ch.rate * (2.0 * ch.X.adjoint() * rho * ch.X - ch.XdX * rho - rho * ch.XdX);
    else
      out += ch.rate * (2.0 * ch.X * rho * ch.X.adjoint() - ch.XdX * rho - rho * ch.XdX);
  }
  return out;
}

namespace {

// Zero everything at or beyond the truncation edges: photon sectors that
// involve the top photon index, and mechanical rows/columns >= window.
void restrict_below_edges(cmat& R, int Nc, int Nm, int window) {
  for (int cr = 0; cr < Nc; ++cr)
    for (int cc = 0; cc < Nc; ++cc) {
      auto blk = R.block((long)cr * Nm, (long)cc * Nm, Nm, Nm);
      if (cr == Nc - 1 || cc == Nc - 1) {
        blk.setZero();
        continue;
      }
      blk.bottomRows(Nm - window).setZero();
      blk.rightCols(Nm - window).setZero();
    }
}

double residual_impl(const basis::BasisElement& elem, basis::Side side, int Nc, int Nm,
                     int window, const std::function<cmat(const cmat&, bool)>& apply) {
  if (window < 0) window = std::max(1, Nm - 8);
  window = std::min(window, Nm);
  const cmat rho = basis::assemble(elem, Nc, Nm);
  if (side == basis::Side::right) {
    const cmat R = apply(rho, false) - elem.eigenvalue * rho;
    return R.norm() / rho.norm();
  }
  cmat R = apply(rho, true) - std::conj(elem.eigenvalue) * rho;
  cmat S = rho;
  restrict_below_edges(R, Nc, Nm, window);
  restrict_below_edges(S, Nc, Nm, window);
  return R.norm() / S.norm();
}

}  // namespace

double residual(const sop::SuperOp& L, const basis::BasisElement& elem,
                basis::Side side, int mech_window) {
  const int Nm = (int)(elem.blocks.empty() ? 1 : elem.blocks[0].rows());
  if (Nm <= 0 || L.dim % Nm != 0) throw std::invalid_argument("residual: dimension mismatch");
  const int Nc = L.dim / Nm;
  return residual_impl(elem, side, Nc, Nm, mech_window, [&](const cmat& rho, bool adj) {
    const Eigen::VectorXcd v =
        adj ? Eigen::VectorXcd(L.mat.adjoint() * sop::vec(rho)) : Eigen::VectorXcd(L.mat * sop::vec(rho));
    return sop::unvec(v, L.dim);
  });
}

double residual(const sop::SystemParams& p, const basis::BasisElement& elem,
                basis::Side side, int Nc, int Nm, int mech_window) {
  const LiouvillianApplier app(p, Nc, Nm);
  return residual_impl(elem, side, Nc, Nm, mech_window,
                       [&](const cmat& rho, bool adj) { return app.apply(rho, adj); });
}

namespace {

std::vector<cmat> evolve_expm(const sop::SuperOp& L, const cmat& rho0,
                              const std::vector<double>& times) {
  std::vector<cmat> out;
  out.reserve(times.size());
  Eigen::VectorXcd v = sop::vec(rho0);
  double tcur = 0.0;
  for (double t : times) {
    const double dt = t - tcur;
    if (dt > 0.0) {
      const cmat U = cmat(L.mat * dt).exp();
      v = U * v;
      tcur = t;
    }
    out.push_back(sop::unvec(v, L.dim));
  }
  return out;
}

// Dormand-Prince 5(4) embedded pair with PI-free elementary step control.
std::vector<cmat> evolve_adaptive(const sop::SuperOp& L, const cmat& rho0,
                                  const std::vector<double>& times,
                                  double rtol, double atol) {
  static const double A[7][6] = {
      {},
      {1.0 / 5},
      {3.0 / 40, 9.0 / 40},
      {44.0 / 45, -56.0 / 15, 32.0 / 9},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
      {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  static const double B5[7] = {35.0 / 384,     0.0,  500.0 / 1113, 125.0 / 192,
                               -2187.0 / 6784, 11.0 / 84, 0.0};
  static const double B4[7] = {5179.0 / 57600,    0.0,          7571.0 / 16695, 393.0 / 640,
                               -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

  std::vector<cmat> out;
  out.reserve(times.size());
  Eigen::VectorXcd y = sop::vec(rho0);
  double t = 0.0;
  const double tend_all = times.empty() ? 0.0 : times.back();
  double h = std::max(1e-6, tend_all / 1e4);

  auto f = [&](const Eigen::VectorXcd& v) { return Eigen::VectorXcd(L.mat * v); };

  for (double tnext : times) {
    while (t < tnext) {
      h = std::min(h, tnext - t);
      if (h < 1e-14 * std::max(1.0, t))
        throw std::runtime_error("direct_evolve: adaptive step size underflow");
      Eigen::VectorXcd k[7];
      k[0] = f(y);
      for (int s = 1; s < 7; ++s) {
        Eigen::VectorXcd ys = y;
        for (int j = 0; j < s; ++j)
          if (A[s][j] != 0.0) ys += (h * A[s][j]) * k[j];
        k[s] = f(ys);
      }
      Eigen::VectorXcd y5 = y, err = Eigen::VectorXcd::Zero(y.size());
      for (int s = 0; s < 7; ++s) {
        if (B5[s] != 0.0) y5 += (h * B5[s]) * k[s];
        const double db = B5[s] - B4[s];
        if (db != 0.0) err += (h * db) * k[s];
      }
      double scale = 0.0;
      for (long i = 0; i < y.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        scale = std::max(scale, std::abs(err[i]) / sc);
      }
      if (scale <= 1.0) {
        t += h;
        y = std::move(y5);
      }
      const double fac = 0.9 * std::pow(std::max(scale, 1e-10), -0.2);
      h *= std::min(5.0, std::max(0.2, fac));
    }
    out.push_back(sop::unvec(y, L.dim));
  }
  return out;
}

}  // namespace

std::vector<cmat> direct_evolve(const sop::SuperOp& L, const cmat& rho0,
                                const std::vector<double>& times, const DirectOptions& opt) {
  if (rho0.rows() != L.dim || rho0.cols() != L.dim)
    throw std::invalid_argument("direct_evolve: dimension mismatch");
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1]))
      throw std::invalid_argument("direct_evolve: times must be sorted and nonnegative");
  }
  if (opt.method == Method::expm) return evolve_expm(L, rho0, times);
  return evolve_adaptive(L, rho0, times, opt.rtol, opt.atol);
}

cplx cross_trace_inner_sum(const std::vector<cplx>& lam) {
  const int M = (int)lam.size() - 1;
  if (M < 1) throw std::invalid_argument("cross_trace_inner_sum: need at least two eigenvalues");

  // suffix[j] = prod_{s=j+1..M} (lam0 - lam_s), prefix[j] = prod_{s<j} (lamM - lam_s)
  std::vector<cplx> suffix((size_t)M + 1), prefix((size_t)M + 1);
  suffix[(size_t)M] = 1.0;
  for (int j = M - 1; j >= 0; --j) suffix[(size_t)j] = suffix[(size_t)j + 1] * (lam[0] - lam[(size_t)j + 1]);
  prefix[0] = 1.0;
  for (int j = 1; j <= M; ++j) prefix[(size_t)j] = prefix[(size_t)j - 1] * (lam[(size_t)M] - lam[(size_t)j - 1]);

  cplx s = 0.0;
  for (int j = 0; j <= M; ++j) s += suffix[(size_t)j] * prefix[(size_t)j];
  const cplx g = suffix[0] * prefix[(size_t)M];
  if (g == cplx(0.0)) throw std::invalid_argument("cross_trace_inner_sum: degenerate eigenvalue tuple");
  return s / g;
}

}  // namespace odb::oracle
