#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "odb/basis.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace odb::basis {

namespace {

constexpr cplx I(0.0, 1.0);

// mp! / m! for nonnegative integers, either order.
double fact_ratio(int mp, int m) {
  double r = 1.0;
  for (int i = m + 1; i <= mp; ++i) r *= double(i);
  for (int i = mp + 1; i <= m; ++i) r /= double(i);
  return r;
}

double inv_fact(int a) {
  double r = 1.0;
  for (int i = 2; i <= a; ++i) r /= double(i);
  return r;
}

double sqrt_fact_ratio(int hi, int lo) {
  return std::exp(0.5 * (fock::log_factorial(hi) - fock::log_factorial(lo)));
}

cmat exp_raising(cplx c, int dim) {
  return fock::exp_lowering(std::conj(c), dim).adjoint();
}

// Solve (shift*Id - M) x = rhs in place with LAPACK's dense LU.
// Solves (shift - M) x = rhs by LU with partial pivoting.  The block
// matrices are banded (ladder operators couple neighbouring Fock levels, so
// the flattened bandwidth is about sqrt(dim)+2); when the detected band is
// narrow enough that zgbsv wins over dense zgesv we pack the band and use it.
// Both paths share the pivoted-LU error characteristics required here.
Eigen::VectorXcd solve_shifted(const cmat& M, cplx shift, const Eigen::VectorXcd& rhs) {
  const lapack_int nn = (lapack_int)M.rows();
  Eigen::VectorXcd x = rhs;

  lapack_int kl = 0, ku = 0;
  for (lapack_int j = 0; j < nn; ++j) {
    for (lapack_int i = 0; i < nn; ++i) {
      if (M(i, j) != 0.0) {
        kl = std::max(kl, i - j);
        ku = std::max(ku, j - i);
      }
    }
  }

  if (kl + ku < nn / 4) {
    const lapack_int ldab = 2 * kl + ku + 1;
    cmat ab = cmat::Zero(ldab, nn);
    for (lapack_int j = 0; j < nn; ++j) {
      const lapack_int ilo = std::max<lapack_int>(0, j - ku);
      const lapack_int ihi = std::min<lapack_int>(nn - 1, j + kl);
      for (lapack_int i = ilo; i <= ihi; ++i)
        ab(kl + ku + i - j, j) = (i == j ? shift : cplx(0)) - M(i, j);
    }
    std::vector<lapack_int> ipiv((size_t)nn);
    lapack_int info = LAPACKE_zgbsv(LAPACK_COL_MAJOR, nn, kl, ku, 1, ab.data(),
                                    ldab, ipiv.data(), x.data(), nn);
    if (info != 0)
      throw std::runtime_error("resolvent solve failed: zgbsv info=" + std::to_string(info));
    return x;
  }

  cmat A = -M;
  A.diagonal().array() += shift;
  std::vector<lapack_int> ipiv((size_t)nn);
  lapack_int info = LAPACKE_zgesv(LAPACK_COL_MAJOR, nn, 1, A.data(), nn,
                                  ipiv.data(), x.data(), nn);
  if (info != 0)
    throw std::runtime_error("resolvent solve failed: zgesv info=" + std::to_string(info));
  return x;
}

// The path-sum construction and bulk element builds request the same few
// displacement operators hundreds of times; each build is an O(D^3)
// eigensolve, so memoize them. Guarded because callers run under OpenMP.
cmat displacement_cached(cplx alpha, int dim, int buffer) {
  using Key = std::tuple<double, double, int, int>;
  static std::map<Key, cmat> cache;
  static std::mutex mu;
  const Key key{alpha.real(), alpha.imag(), dim, buffer};
  {
    std::lock_guard<std::mutex> g(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  cmat D = fock::displacement(alpha, dim, buffer);
  std::lock_guard<std::mutex> g(mu);
  return cache.emplace(key, std::move(D)).first->second;
}

std::string label_str(int l, int n, int k, int m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(l,n,k,m)=(%d,%d,%d,%d)", l, n, k, m);
  return buf;
}

// The recursion divides by lambda - lambda' over the spectrum of the block
// being solved; parameters placing another eigenvalue that close make the
// element ill-defined, so refuse loudly instead of returning garbage.
void check_degeneracy(cplx lambda, const EigenLabel& lab, int l, int j,
                      const SystemParams& p) {
  const double thr = 1e-8 * std::max(p.gamma, p.kappa);
  double reach = -lambda.real() - (j + std::abs(l) / 2.0) * p.kappa
                 + std::abs(epsilon(l, j, p).real()) + thr;
  double cap;
  if (p.gamma > 0.0)
    cap = reach / p.gamma + 2.0;
  else
    cap = 2.0 * (lab.n + lab.m + std::abs(lab.k) + std::abs(l)) + 40.0;
  if (cap < 0.0) return;
  const int mk_cap = (int)std::ceil(cap);
  for (int kp = -2 * mk_cap; kp <= 2 * mk_cap; ++kp)
    for (int mp = 0; mp + std::abs(kp) / 2.0 <= cap; ++mp) {
      const cplx lam2 = eigenvalue({l, j, kp, mp, Side::right}, p);
      if (std::abs(lambda - lam2) < thr) {
        char tbuf[32];
        std::snprintf(tbuf, sizeof tbuf, "%.3e", thr);
        throw std::runtime_error(
            "degenerate eigenvalues: " + label_str(lab.l, lab.n, lab.k, lab.m) +
            " collides with block " + label_str(l, j, kp, mp) +
            " within threshold " + tbuf);
      }
    }
}

}  // namespace

cplx lambda_C(int l, int n, const SystemParams& p) { return sop::lambda_C(p, l, n); }

cplx lambda_M(int k, int m, const SystemParams& p) {
  return cplx(-(m + std::abs(k) / 2.0) * p.gamma, -double(k) * p.nu);
}

cplx epsilon(int l, int n, const SystemParams& p) {
  if (l == 0) return 0.0;
  if (p.variant == Variant::weak) {
    const double b2 = p.chi * p.chi / (p.nu * p.nu + p.gamma * p.gamma / 4.0);
    return double(l) * b2 *
           cplx(-double(l) * p.gamma * (p.mbar + 0.5), (2 * n + std::abs(l)) * p.nu);
  }
  // dsme: the real part is the photon dephasing contracted with l^2; at
  // mbar = 0 it vanishes in the limit and epsilon is purely imaginary.
  const double b = p.chi / p.nu;
  return cplx(-double(l) * double(l) * sop::dsme_dephasing_rate(p),
              double(l) * b * b * (2 * n + std::abs(l)) * p.nu);
}

cplx eigenvalue(const EigenLabel& lab, const SystemParams& p) {
  if (lab.l < 0 || (lab.l == 0 && lab.k < 0))
    return std::conj(eigenvalue({-lab.l, lab.n, -lab.k, lab.m, lab.side}, p));
  return lambda_M(lab.k, lab.m, p) + lambda_C(lab.l, lab.n, p) + epsilon(lab.l, lab.n, p);
}

DisplacementParams displacement_params(int l, int n, const SystemParams& p) {
  DisplacementParams d;
  if (p.variant == Variant::dsme) {
    d.beta = p.chi / p.nu;
    d.alpha_ln = -double(n + l) * d.beta;
    d.beta_ln = -double(n) * d.beta;
    d.eta_l = 0.0;
    return d;
  }
  d.beta = p.chi / cplx(p.nu, -p.gamma / 2.0);
  // |beta|^2/chi stays finite as chi -> 0, which keeps l-dependent terms
  // well defined at zero coupling.
  const double b2_over_chi = p.chi / (p.nu * p.nu + p.gamma * p.gamma / 4.0);
  d.alpha_ln = -double(n + l) * d.beta - I * double(l) * b2_over_chi * p.gamma * p.mbar;
  d.beta_ln = d.alpha_ln + double(l) * std::conj(d.beta);
  d.eta_l = I * double(l) * b2_over_chi * p.gamma * (2.0 * p.mbar + 1.0);
  return d;
}

cmat oscillator_eigvec(int k, int m, double mbar, Side side, int dim) {
  if (m < 0) throw std::invalid_argument("oscillator_eigvec: m must be >= 0");
  if (dim < 1) throw std::invalid_argument("oscillator_eigvec: dim must be >= 1");
  if (mbar < 0.0) throw std::invalid_argument("oscillator_eigvec: mbar must be >= 0");
  if (k < 0) return cmat(oscillator_eigvec(-k, m, mbar, side, dim).adjoint());

  // The alternating sums below cancel almost completely at large m (the
  // results are O(1) while individual terms grow combinatorially), so all
  // interior arithmetic runs in long double; only the finished entry is
  // rounded to double.
  const long double mb = mbar;
  const long double s = 1.0L / (mb + 1.0L);
  const long double oneminus = mb / (mb + 1.0L);
  std::vector<long double> lp((size_t)m + 1);  // Laguerre series coefficients
  for (int pw = 0; pw <= m; ++pw) {
    long double c = 1.0L;  // binom(m+k, m-pw) / pw!
    for (int i = 1; i <= m - pw; ++i) c *= (long double)(pw + k + i) / (long double)i;
    for (int i = 1; i <= pw; ++i) c /= (long double)i;
    lp[(size_t)pw] = (pw % 2) ? -c : c;
  }

  cmat out = cmat::Zero(dim, dim);
  if (side == Side::right) {
    const double pref = std::pow(mbar + 1.0, -(k + 1));
    for (int q = 0; q + k < dim; ++q) {
      long double dq = 0.0L;
      long double fall = 1.0L;  // q!/(q-p)!
      for (int pw = 0; pw <= std::min(m, q); ++pw) {
        dq += lp[(size_t)pw] * std::pow(s, (long double)pw) * fall * std::pow(oneminus, (long double)(q - pw));
        fall *= (long double)(q - pw);
      }
      out(q + k, q) = pref * sqrt_fact_ratio(q + k, q) * (double)dq;
    }
  } else {
    const double pref = fact_ratio(m, m + k);  // m!/(m+k)!
    for (int q = 0; q + k < dim; ++q) {
      const int j = q + k;
      long double ej = 0.0L;
      long double rise = 1.0L;  // (j+1)(j+2)...(j+p)
      for (int pw = 0; pw <= m; ++pw) {
        ej += lp[(size_t)pw] * std::pow(s, (long double)pw) * rise;
        rise *= (long double)(j + pw + 1);
      }
      out(q + k, q) = pref * sqrt_fact_ratio(q + k, q) * (double)ej;
    }
  }
  return out;
}

cmat mechanical_eigvec(int l, int n, int k, int m, Side side,
                       const SystemParams& p, int dim, int buffer) {
  p.validate();
  if (l < 0)
    throw std::invalid_argument(
        "mechanical_eigvec: l < 0 elements are defined by conjugation; "
        "conjugate the (-l, n, -k, m) element instead");
  if (n < 0 || m < 0) throw std::invalid_argument("mechanical_eigvec: n, m must be >= 0");
  if (dim < 1) throw std::invalid_argument("mechanical_eigvec: dim must be >= 1");

  const DisplacementParams dp = displacement_params(l, n, p);
  const double g = std::max({std::abs(dp.alpha_ln), std::abs(dp.beta_ln), std::abs(dp.eta_l)});
  int need = (int)std::ceil(4.0 * (g * g + g) + 10.0) + 2 * m + std::abs(k);
  if (buffer < 0) buffer = std::max(16, need);
  const int D = dim + buffer;

  const cmat mu = oscillator_eigvec(k, m, p.mbar, side, D);
  const cmat Dal = displacement_cached(dp.alpha_ln, D, need);
  const cmat Dbl = displacement_cached(dp.beta_ln, D, need);
  cmat core;
  if (dp.eta_l == cplx(0.0)) {
    core = mu;
  } else if (side == Side::right) {
    core = fock::exp_lowering(-dp.eta_l, D) * mu * fock::exp_lowering(dp.eta_l, D);
  } else {
    const cplx ec = std::conj(dp.eta_l);
    core = exp_raising(ec, D) * mu * exp_raising(-ec, D);
  }
  const cmat full = Dal.adjoint() * core * Dbl;
  return full.topLeftCorner(dim, dim);
}

BasisElement right_eigvec(const EigenLabel& lab, const SystemParams& p, int Nc, int Nm) {
  p.validate();
  if (lab.l < 0) {
    EigenLabel mir{-lab.l, lab.n, -lab.k, lab.m, lab.side};
    BasisElement e = conjugate_element(right_eigvec(mir, p, Nc, Nm));
    e.label.side = lab.side;
    return e;
  }
  if (lab.n < 0 || lab.n >= Nc || lab.m < 0)
    throw std::invalid_argument("right_eigvec: label out of range");
  if (lab.n + lab.l > Nc - 1)
    throw std::invalid_argument("right_eigvec: sector n + l exceeds photon truncation");

  BasisElement e;
  e.label = lab;
  e.label.side = Side::right;
  e.eigenvalue = eigenvalue(lab, p);
  e.first_block = 0;
  e.blocks.assign((size_t)lab.n + 1, cmat());
  e.blocks[(size_t)lab.n] = mechanical_eigvec(lab.l, lab.n, lab.k, lab.m, Side::right, p, Nm);

  for (int j = lab.n; j >= 1; --j) {
    check_degeneracy(e.eigenvalue, lab, lab.l, j - 1, p);
    const double c = p.kappa * std::sqrt(double(j) * double(j + lab.l));
    const Eigen::VectorXcd rhs = c * sop::vec(e.blocks[(size_t)j]);
    const cmat M = sop::build_M_ln(p, lab.l, j - 1, Nm).mat;
    e.blocks[(size_t)j - 1] = sop::unvec(solve_shifted(M, e.eigenvalue, rhs), Nm);
  }
  return e;
}

BasisElement left_eigvec(const EigenLabel& lab, const SystemParams& p, int Nc, int Nm) {
  p.validate();
  if (lab.l < 0) {
    EigenLabel mir{-lab.l, lab.n, -lab.k, lab.m, lab.side};
    BasisElement e = conjugate_element(left_eigvec(mir, p, Nc, Nm));
    e.label.side = lab.side;
    return e;
  }
  if (lab.n < 0 || lab.n >= Nc || lab.m < 0)
    throw std::invalid_argument("left_eigvec: label out of range");
  const int jtop = Nc - 1 - lab.l;  // highest photon sector that fits
  if (lab.n > jtop)
    throw std::invalid_argument("left_eigvec: sector n + l exceeds photon truncation");

  BasisElement e;
  e.label = lab;
  e.label.side = Side::left;
  e.eigenvalue = eigenvalue(lab, p);
  e.first_block = lab.n;
  e.blocks.assign((size_t)(jtop - lab.n) + 1, cmat());
  e.blocks[0] = mechanical_eigvec(lab.l, lab.n, lab.k, lab.m, Side::left, p, Nm);

  const cplx lamc = std::conj(e.eigenvalue);
  for (int j = lab.n + 1; j <= jtop; ++j) {
    check_degeneracy(e.eigenvalue, lab, lab.l, j, p);
    const double c = p.kappa * std::sqrt(double(j) * double(j + lab.l));
    const Eigen::VectorXcd rhs = c * sop::vec(e.blocks[(size_t)(j - 1 - lab.n)]);
    const cmat Md = sop::build_M_ln(p, lab.l, j, Nm, /*adjoint=*/true).mat;
    e.blocks[(size_t)(j - lab.n)] = sop::unvec(solve_shifted(Md, lamc, rhs), Nm);
  }
  return e;
}

cplx overlap_coeff(int l, int kp, int mp, int k, int m, const SystemParams& p) {
  p.validate();
  if (m < 0 || mp < 0) throw std::invalid_argument("overlap_coeff: m indices must be >= 0");
  const cplx beta = displacement_params(0, 0, p).beta;

  // sgn(0) := 1. With that convention both denominator arguments are
  // integers, and the two sign choices for sgn(0) give identical values.
  const int sk = (k < 0) ? -1 : 1;
  const int skp = (kp < 0) ? -1 : 1;
  const int ip = std::abs(sk + skp) / 2;
  const int im = std::abs(sk - skp) / 2;

  const int a1 = mp - m - std::abs(k) * im;
  const int a2 = mp - m + std::abs(kp) - std::abs(k) * ip;
  if (a1 < 0 || a2 < 0) return 0.0;

  const int expo = a1 + a2;  // equals 2(mp-m) + |kp| - |k|
  const double mag = std::abs(beta);
  const double sign = ((mp - m) % 2) ? -1.0 : 1.0;
  const cplx phase = std::exp(I * std::arg(beta) * double(kp - k))
                   * std::exp(double(l) * (beta * beta - std::conj(beta) * std::conj(beta)) / 2.0);
  return sign * fact_ratio(mp, m) * std::pow(mag, expo) *
         std::pow(p.mbar + 1.0, m - mp) * inv_fact(a1) * inv_fact(a2) * phase;
}

BasisElement right_eigvec_pathsum(const EigenLabel& lab, const SystemParams& p,
                                  int Nc, int Nm, const PathsumOptions& opt) {
  p.validate();
  if (lab.l < 0) {
    EigenLabel mir{-lab.l, lab.n, -lab.k, lab.m, lab.side};
    BasisElement e = conjugate_element(right_eigvec_pathsum(mir, p, Nc, Nm, opt));
    e.label.side = lab.side;
    return e;
  }
  if (lab.n < 0 || lab.n >= Nc || lab.m < 0)
    throw std::invalid_argument("right_eigvec_pathsum: label out of range");
  if (lab.n + lab.l > Nc - 1)
    throw std::invalid_argument("right_eigvec_pathsum: sector n + l exceeds photon truncation");

  BasisElement e;
  e.label = lab;
  e.label.side = Side::right;
  e.eigenvalue = eigenvalue(lab, p);
  e.first_block = 0;
  e.blocks.assign((size_t)lab.n + 1, cmat());
  e.blocks[(size_t)lab.n] = mechanical_eigvec(lab.l, lab.n, lab.k, lab.m, Side::right, p, Nm);

  const int kb = std::abs(lab.k) + opt.k_margin;
  const int mb = lab.m + opt.m_margin;
  const double lf_n = fock::log_factorial(lab.n);
  const double lf_nl = fock::log_factorial(lab.n + lab.l);

  std::map<std::pair<int, int>, cplx> weights;
  weights[{lab.k, lab.m}] = 1.0;
  bool tail_warned = false;

  for (int s = lab.n - 1; s >= 0; --s) {
    std::map<std::pair<int, int>, cplx> next;
    for (const auto& [km, w] : weights) {
      for (int kk = -kb; kk <= kb; ++kk) {
        for (int mm = 0; mm <= mb; ++mm) {
          const cplx c = overlap_coeff(lab.l, kk, mm, km.first, km.second, p);
          if (c == cplx(0.0)) continue;
          const cplx denom = e.eigenvalue - eigenvalue({lab.l, s, kk, mm, Side::right}, p);
          if (std::abs(denom) < 1e-8 * std::max(p.gamma, p.kappa))
            throw std::runtime_error(
                "degenerate eigenvalues in path sum: " +
                label_str(lab.l, lab.n, lab.k, lab.m) + " collides with block " +
                label_str(lab.l, s, kk, mm));
          next[{kk, mm}] += w * p.kappa * c / denom;
        }
      }
    }
    double wmax = 0.0, edge = 0.0;
    for (const auto& [km, w] : next) {
      wmax = std::max(wmax, std::abs(w));
      if (std::abs(km.first) == kb || km.second == mb) edge = std::max(edge, std::abs(w));
    }
    if (!tail_warned && wmax > 0.0 && edge > opt.tail_tol * wmax) {
      std::cerr << "warning: path-sum intermediate index bound reached without decay below "
                << opt.tail_tol << " for " << label_str(lab.l, lab.n, lab.k, lab.m)
                << "; enlarge PathsumOptions margins\n";
      tail_warned = true;
    }

    const double a = std::exp(0.5 * (lf_n + lf_nl - fock::log_factorial(s)
                                     - fock::log_factorial(s + lab.l)));
    cmat blk = cmat::Zero(Nm, Nm);
    for (const auto& [km, w] : next)
      blk += (a * w) * mechanical_eigvec(lab.l, s, km.first, km.second, Side::right, p, Nm);
    e.blocks[(size_t)s] = std::move(blk);
    weights = std::move(next);
  }
  return e;
}

BasisElement conjugate_element(const BasisElement& e) {
  BasisElement out;
  out.label = {-e.label.l, e.label.n, -e.label.k, e.label.m, e.label.side};
  out.eigenvalue = std::conj(e.eigenvalue);
  out.first_block = e.first_block;
  out.blocks.reserve(e.blocks.size());
  for (const auto& b : e.blocks) out.blocks.emplace_back(b.adjoint());
  return out;
}

cmat assemble(const BasisElement& e, int Nc, int Nm) {
  const int lp = std::max(e.label.l, 0);
  const int lm = std::max(-e.label.l, 0);
  cmat out = cmat::Zero(Nc * Nm, Nc * Nm);
  for (size_t i = 0; i < e.blocks.size(); ++i) {
    const int j = e.first_block + (int)i;
    const int ket = j + lp, bra = j + lm;
    if (ket >= Nc || bra >= Nc)
      throw std::invalid_argument("assemble: block outside photon truncation");
    if (e.blocks[i].rows() != Nm || e.blocks[i].cols() != Nm)
      throw std::invalid_argument("assemble: block dimension mismatch");
    out.block(ket * Nm, bra * Nm, Nm, Nm) = e.blocks[i];
  }
  return out;
}

}  // namespace odb::basis
