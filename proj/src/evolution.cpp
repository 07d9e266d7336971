#include "odb/evolution.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "odb/kernels.hpp"

namespace odb::evo {

std::vector<basis::EigenLabel> default_label_set(int Nc, int m_cut) {
  std::vector<basis::EigenLabel> out;
  for (int l = -(Nc - 2); l <= Nc - 2; ++l)
    for (int n = 0; n + std::abs(l) <= Nc - 2; ++n)
      for (int k = -m_cut; k <= m_cut; ++k)
        for (int m = 0; m + std::abs(k) <= m_cut; ++m)
          out.push_back({l, n, k, m, basis::Side::right});
  return out;
}

SpectralDecomposition decompose(const cmat& rho0,
                                const std::vector<basis::EigenLabel>& labels,
                                const sop::SystemParams& p, int Nc, int Nm) {
  p.validate();
  if (rho0.rows() != (long)Nc * Nm || rho0.cols() != (long)Nc * Nm)
    throw std::invalid_argument("decompose: rho0 dimension mismatch");

  SpectralDecomposition d;
  d.params = p;
  d.Nc = Nc;
  d.Nm = Nm;
  d.terms.resize(labels.size());

  // Left and right elements of one label are independent of every other
  // label, so the sweep parallelizes cleanly.
  std::vector<cmat> rights = kern::map_indexed((int)labels.size(), [&](int i) {
    return basis::assemble(basis::right_eigvec(labels[(size_t)i], p, Nc, Nm), Nc, Nm);
  });
  std::vector<cmat> lefts = kern::map_indexed((int)labels.size(), [&](int i) {
    return basis::assemble(basis::left_eigvec(labels[(size_t)i], p, Nc, Nm), Nc, Nm);
  });

  for (size_t i = 0; i < labels.size(); ++i) {
    auto& t = d.terms[i];
    t.label = labels[i];
    t.eigenvalue = basis::eigenvalue(labels[i], p);
    t.coefficient = (lefts[i].adjoint() * rho0).trace();
    t.right_mat = std::move(rights[i]);
  }

  d.t0_reconstruction_error = trace_distance(evolve(d, 0.0), rho0);
  if (d.t0_reconstruction_error > 1e-4)
    std::cerr << "warning: spectral decomposition reconstructs the initial state "
                 "only to trace distance " << d.t0_reconstruction_error
              << "; enlarge the label set or move away from the truncation edge\n";
  return d;
}

cmat evolve(const SpectralDecomposition& d, double t) {
  if (!std::isfinite(t)) throw std::invalid_argument("evolve: t must be finite");
  cmat acc = cmat::Zero((long)d.Nc * d.Nm, (long)d.Nc * d.Nm);
  for (const auto& term : d.terms)
    acc += (term.coefficient * std::exp(term.eigenvalue * t)) * term.right_mat;
  return acc;
}

std::vector<cmat> evolve_many(const SpectralDecomposition& d, const std::vector<double>& times) {
  return kern::map_indexed((int)times.size(),
                           [&](int i) { return evolve(d, times[(size_t)i]); });
}

std::vector<cmat> evolve_many_serial(const SpectralDecomposition& d,
                                     const std::vector<double>& times) {
  return kern::map_indexed_serial((int)times.size(),
                                  [&](int i) { return evolve(d, times[(size_t)i]); });
}

Observables observables(const cmat& rho, int Nc, int Nm) {
  if (rho.rows() != (long)Nc * Nm || rho.cols() != rho.rows())
    throw std::invalid_argument("observables: dimension mismatch");
  Observables o;
  o.trace = rho.trace();
  o.purity = (rho * rho).trace().real();
  cplx na = 0.0, nb = 0.0, q = 0.0;
  for (int c = 0; c < Nc; ++c)
    for (int m = 0; m < Nm; ++m) {
      const long i = (long)c * Nm + m;
      na += double(c) * rho(i, i);
      nb += double(m) * rho(i, i);
      if (m + 1 < Nm)  // <b + b^dag> couples neighboring phonon levels
        q += std::sqrt(double(m + 1)) * (rho(i, i + 1) + rho(i + 1, i));
    }
  o.photon_number = na.real();
  o.phonon_number = nb.real();
  o.mech_quadrature = q.real();
  return o;
}

double trace_distance(const cmat& A, const cmat& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("trace_distance: shape mismatch");
  Eigen::BDCSVD<cmat> svd(A - B);
  return 0.5 * svd.singularValues().sum();
}

}  // namespace odb::evo
