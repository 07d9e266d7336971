// oracle.hpp — brute-force ground truth for the analytic basis
//
// Dense non-Hermitian eigendecomposition of the truncated Liouvillian,
// residual evaluators, and direct time integration. Everything here is
// deliberately independent of the closed forms it checks: spectra come from
// LAPACK, time evolution from the matrix exponential or an embedded
// Runge-Kutta pair.
#pragma once

#include <vector>

#include "odb/basis.hpp"
#include "odb/superop.hpp"

namespace odb::oracle {

using fock::cplx;
using fock::cmat;

struct MatchEntry {
  basis::EigenLabel label;
  cplx analytic;
  cplx numeric;      // meaningful only when matched
  double delta = 0.0;
  bool matched = false;
  bool tie = false;  // two numeric candidates at indistinguishable distance
};

struct SpectrumReport {
  std::vector<MatchEntry> matched;
  std::vector<cplx> unmatched_numeric;
  double tolerance = 0.0;

  bool all_within_tol() const;
  double worst_delta() const;
};

// All eigenvalues of the superoperator matrix (values only, no vectors).
// Throws std::invalid_argument when the matrix dimension exceeds the cap.
std::vector<cplx> brute_spectrum(const sop::SuperOp& L, int dim_cap = 4096);

// Injective greedy matching: repeatedly pair the globally nearest
// (analytic, numeric) couple until analytic entries are exhausted. Ties are
// flagged, not resolved; entries with delta > tol remain in `matched` but
// fail all_within_tol().
SpectrumReport match_spectrum(const std::vector<std::pair<basis::EigenLabel, cplx>>& analytic,
                              const std::vector<cplx>& numeric, double tol);

// Apply L (or its Hilbert-Schmidt adjoint) to a joint-space operator using
// d x d matrix products only. This is what makes residual checks affordable
// at mechanical dims where the dense superoperator would not fit in memory.
class LiouvillianApplier {
 public:
  LiouvillianApplier(const sop::SystemParams& p, int Nc, int Nm);
  cmat apply(const cmat& rho, bool adjoint = false) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  cmat H_;
  struct Channel {
    double rate;  // the full prefactor of 2 X rho X^dag - {X^dag X, rho}
    cmat X, XdX;
  };
  std::vector<Channel> channels_;
};

// Relative eigenvector residual. Right: ||L rho - lambda rho|| / ||rho||.
// Left: || L^dag sigma - conj(lambda) sigma || / ||sigma||, with both norms
// restricted below the truncation edges: photon sectors involving index
// Nc-1 are dropped (the analytic left elements truncate an infinite photon
// sum there) and mechanical indices are windowed to [0, mech_window)
// (default Nm - 8), since the left blocks are polynomially growing and
// their residual concentrates on the last few mechanical levels.
double residual(const sop::SuperOp& L, const basis::BasisElement& elem,
                basis::Side side, int mech_window = -1);
double residual(const sop::SystemParams& p, const basis::BasisElement& elem,
                basis::Side side, int Nc, int Nm, int mech_window = -1);

enum class Method { expm, adaptive };

struct DirectOptions {
  Method method = Method::expm;
  double rtol = 1e-10;
  double atol = 1e-12;
};

// rho(t_i) for sorted nonnegative times. Default: scaled-and-squared matrix
// exponential, stepping from each time point to the next. Flag: adaptive
// embedded 5(4) Runge-Kutta pair on the vectorized state. Throws
// std::runtime_error on step-size underflow in adaptive mode.
std::vector<cmat> direct_evolve(const sop::SuperOp& L, const cmat& rho0,
                                const std::vector<double>& times,
                                const DirectOptions& opt = {});

// The normalized inner j-sum behind the vanishing of cross traces between
// left and right elements with different photon excitation. Given the level
// eigenvalues lam[0..M] (endpoints included, all pairwise distinct),
//
//   S = (1/g) * sum_j  prod_{s>j} (lam[0]-lam[s]) * prod_{s<j} (lam[M]-lam[s])
//
// with g the product of every monomial appearing in the two products. S is
// identically zero; evaluating it in floating point probes the identity.
// Throws std::invalid_argument for fewer than two eigenvalues.
cplx cross_trace_inner_sum(const std::vector<cplx>& lam);

}  // namespace odb::oracle
