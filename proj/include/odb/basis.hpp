// basis.hpp — the exact damping basis of the optomechanical Liouvillian
//
// Eigenvalues are closed-form. Eigenvectors live on single photon coherence
// sectors: an element with label (l,n,k,m) is sum_j |j+l><j| (x) block_j,
// where j runs over the smaller photon index (so the ket index is j+l for
// l >= 0 and the bra index is j+|l| for l < 0). Right elements carry blocks
// j = 0..n, left elements j = n..Nc-1. Elements with l < 0 are defined by
// Hermitian conjugation of the (-l, n, -k, m) element and satisfy
// eigenvalue(-l,n,-k,m) = conj(eigenvalue(l,n,k,m)).
#pragma once

#include <complex>
#include <vector>

#include "odb/fock.hpp"
#include "odb/superop.hpp"

namespace odb::basis {

using fock::cplx;
using fock::cmat;
using sop::SystemParams;
using sop::Variant;

enum class Side { right, left };

struct EigenLabel {
  int l = 0;   // photon coherence index, any sign
  int n = 0;   // photon excitation, >= 0
  int k = 0;   // mechanical coherence index, any sign
  int m = 0;   // mechanical excitation, >= 0
  Side side = Side::right;
};

// Parameters of the asymmetric displacement that reduces M^(l,n) to a plain
// damped oscillator: mu -> D^dag(alpha_ln) e^{-eta_l b} mu e^{eta_l b} D(beta_ln).
// Invariant: beta_ln - alpha_ln = l*conj(beta) (weak) or l*beta (dsme, beta
// real and eta_l = 0).
struct DisplacementParams {
  cplx beta;
  cplx alpha_ln;
  cplx beta_ln;
  cplx eta_l;
};

struct BasisElement {
  EigenLabel label;
  cplx eigenvalue;
  int first_block = 0;         // photon index of blocks.front()
  std::vector<cmat> blocks;    // mechanical operators, one per photon sector
};

cplx lambda_C(int l, int n, const SystemParams& p);
cplx lambda_M(int k, int m, const SystemParams& p);

// Interaction-induced eigenvalue correction epsilon_{l,n}; zero when l = 0.
cplx epsilon(int l, int n, const SystemParams& p);

// lambda_M + lambda_C + epsilon for l >= 0 (and for l = 0, k >= 0); other
// labels reduce to the conjugate of the mirrored label so that conjugation
// symmetry holds bitwise.
cplx eigenvalue(const EigenLabel& lab, const SystemParams& p);

DisplacementParams displacement_params(int l, int n, const SystemParams& p);

// Eigenvectors of the pure damped oscillator: mu_hat (right) are displaced
// thermal states times Laguerre polynomials, mu_chk (left) their polynomial
// duals, normalized so Tr{mu_chk^dag mu_hat} = delta. k < 0 by conjugate
// transpose of the |k| expression.
cmat oscillator_eigvec(int k, int m, double mbar, Side side, int dim);

// Eigenvector of M^(l,n) (side=right) or its adjoint (side=left) on a
// dim-dimensional mechanical space. buffer < 0 picks an enlargement
// adequate for the displacement magnitudes involved.
cmat mechanical_eigvec(int l, int n, int k, int m, Side side,
                       const SystemParams& p, int dim, int buffer = -1);

// Full eigenvectors of L via the jump recursion; each new block solves
// (lambda - M^(l,j)) x = rhs by dense LU. Throws std::runtime_error naming
// the colliding labels if the solve would be degenerate.
BasisElement right_eigvec(const EigenLabel& lab, const SystemParams& p, int Nc, int Nm);
BasisElement left_eigvec(const EigenLabel& lab, const SystemParams& p, int Nc, int Nm);

// Expansion coefficient c^{l,k,m}_{k',m'} of a level-n displaced eigenvector
// in the level-(n-1) family (independent of n). Arguments are ordered
// (l, k', m', k, m). See docs/overlap_convention.md for how the sign
// ambiguity in the closed form was resolved.
cplx overlap_coeff(int l, int kp, int mp, int k, int m, const SystemParams& p);

struct PathsumOptions {
  int k_margin = 6;     // intermediate |k_r| <= |k| + k_margin
  int m_margin = 6;     // intermediate m_r <= m + m_margin
  double tail_tol = 1e-10;  // warn when boundary weights exceed this
};

// Same element as right_eigvec, but built from the closed-form expansion:
// lower blocks are sums over intermediate-index paths weighted by products
// of kappa c / (lambda - lambda'). Serves as a consistency oracle for the
// resolvent route.
BasisElement right_eigvec_pathsum(const EigenLabel& lab, const SystemParams& p,
                                  int Nc, int Nm, const PathsumOptions& opt = {});

BasisElement conjugate_element(const BasisElement& e);

// Joint-space matrix sum_j |j + l_+><j + l_-| (x) block_j of an element.
cmat assemble(const BasisElement& e, int Nc, int Nm);

}  // namespace odb::basis
