// evolution.hpp — spectral time evolution in the damping basis
//
// rho(t) = sum over labels of c * exp(lambda t) * rho_hat, with coefficients
// c = Tr{rho_chk^dag rho0}. The exponentials are exact, so there is no
// integrator error on this path; accuracy is set entirely by the label set
// and the truncation dims.
#pragma once

#include <vector>

#include "odb/basis.hpp"

namespace odb::evo {

using fock::cplx;
using fock::cmat;

struct SpectralDecomposition {
  sop::SystemParams params;
  int Nc = 0, Nm = 0;
  struct Term {
    basis::EigenLabel label;
    cplx eigenvalue;
    cplx coefficient;
    cmat right_mat;  // assembled right eigenvector, cached for evolve()
  };
  std::vector<Term> terms;
  double t0_reconstruction_error = 0.0;  // trace distance at t = 0
};

// All labels with n + |l| <= Nc - 2 and m + |k| <= m_cut, both sides of l
// and k, staying clear of the photon truncation edge.
std::vector<basis::EigenLabel> default_label_set(int Nc, int m_cut);

// Coefficients c_label = Tr{rho_chk^dag rho0}. Warns on stderr when the
// t = 0 reconstruction misses rho0 by more than 1e-4 in trace distance
// (label set too small, or state too close to a truncation edge).
SpectralDecomposition decompose(const cmat& rho0,
                                const std::vector<basis::EigenLabel>& labels,
                                const sop::SystemParams& p, int Nc, int Nm);

cmat evolve(const SpectralDecomposition& d, double t);

// Evaluate many time points; parallel over t since each is independent.
std::vector<cmat> evolve_many(const SpectralDecomposition& d, const std::vector<double>& times);
std::vector<cmat> evolve_many_serial(const SpectralDecomposition& d, const std::vector<double>& times);

struct Observables {
  double photon_number = 0.0;
  double phonon_number = 0.0;
  double mech_quadrature = 0.0;
  double purity = 0.0;
  cplx trace;
};

Observables observables(const cmat& rho, int Nc, int Nm);

// 0.5 * ||A - B||_1, the standard distinguishability metric.
double trace_distance(const cmat& A, const cmat& B);

}  // namespace odb::evo
