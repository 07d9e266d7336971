// superop.hpp — Liouvillian construction on truncated joint Fock spaces
//
// Vectorization is column stacking: vec(|i><j|) sits at index j*d + i, so
// vec(A rho B) = kron(B^T, A) vec(rho). The joint space is ordered cavity
// (x) mechanics, basis index = cav*Nm + mech. Both conventions are pinned
// by tests; everything downstream assumes them.
#pragma once

#include <complex>
#include <vector>
#include <Eigen/Dense>

#include "odb/fock.hpp"

namespace odb::sop {

using fock::cplx;
using fock::cmat;

enum class Variant { weak, dsme };

// Selects which part of the Liouvillian build_liouvillian returns. M is
// everything except the photon jump term J rho = kappa a rho a^dag; the
// split L = M + J is what makes the photon-sector recursion work.
enum class Part { full, M, J };

struct SystemParams {
  double omega = 0.0;   // cavity frequency (rotating-frame detuning)
  double nu = 1.0;      // mechanical frequency
  double chi = 0.0;     // optomechanical coupling
  double kappa = 0.0;   // cavity energy decay rate
  double gamma = 0.0;   // mechanical damping rate
  double mbar = 0.0;    // thermal phonon occupation of the mechanical bath
  Variant variant = Variant::weak;

  // Throws std::invalid_argument on non-finite or unphysical values
  // (nu <= 0, negative rates, negative mbar).
  void validate() const;

  // Thermal occupation 1/(exp(nu/T) - 1) in units where hbar = k_B = 1.
  static double mbar_from_temperature(double nu, double T);
};

// A superoperator on a d-dimensional Hilbert space, stored as the d^2 x d^2
// matrix acting on column-stacked density operators.
struct SuperOp {
  int dim = 0;
  cmat mat;
};

cmat kron(const cmat& A, const cmat& B);
Eigen::VectorXcd vec(const cmat& rho);
cmat unvec(const Eigen::VectorXcd& v, int d);

// C[X] rho = [X, rho]
SuperOp commutator_superop(const cmat& X);

// D[X] rho = 2 X rho X^dag - X^dag X rho - rho X^dag X. With adjoint=true,
// returns the Hilbert-Schmidt adjoint superoperator instead (the generator
// acting on observables); as a matrix this is exactly mat.adjoint().
SuperOp dissipator(const cmat& X, bool adjoint = false);

// H = omega a^dag a + nu b^dag b - chi a^dag a (b + b^dag) on the joint
// space. Identical for both variants; the variants differ only in the
// dissipative part.
cmat build_hamiltonian(const SystemParams& p, int Nc, int Nm);

SuperOp build_liouvillian(const SystemParams& p, int Nc, int Nm,
                          Part part = Part::full);

// Eigenvalue of the pure cavity Liouvillian on the coherence sector
// |j+l><j|: lambda_C = -i l omega - (n + |l|/2) kappa. The reduced
// mechanical blocks are shifted by this scalar, which is why it lives here
// rather than with the rest of the analytic eigenvalue pieces.
cplx lambda_C(const SystemParams& p, int l, int n);

// Reduced mechanical superoperator M^(l,n) of dimension Nm^2, i.e. the
// restriction of M to the photon coherence sector |n+l><n| (x) mu. With
// adjoint=true returns the conjugate transpose, whose eigenvectors are the
// left elements.
SuperOp build_M_ln(const SystemParams& p, int l, int n, int Nm,
                   bool adjoint = false);

// DSME photon dephasing rate 4 chi^2 gamma / (nu^2 ln((mbar+1)/mbar)).
// At mbar = 0 the log diverges and the rate tends to 0; that limit is
// returned and a one-time warning is printed, since the derivation of the
// dressed-state equation assumes a finite-temperature bath.
double dsme_dephasing_rate(const SystemParams& p);

}  // namespace odb::sop
