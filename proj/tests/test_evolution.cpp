#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "odb/evolution.hpp"
#include "odb/kernels.hpp"
#include "odb/oracle.hpp"
#include "odb/superop.hpp"

using namespace odb;
using basis::EigenLabel;
using basis::Side;
using fock::cmat;
using fock::cplx;

namespace {

sop::SystemParams small_weak() {
  sop::SystemParams p;
  p.omega = 5.0;
  p.nu = 1.0;
  p.chi = 0.05;
  p.kappa = 0.3;
  p.gamma = 0.021;
  p.mbar = 0.2;
  return p;
}

cmat thermal(double mbar, int dim) {
  cmat r = cmat::Zero(dim, dim);
  for (int q = 0; q < dim; ++q) r(q, q) = std::pow(mbar / (mbar + 1.0), q) / (mbar + 1.0);
  return r;
}

cmat joint_fock(int nc, int qm, int Nc, int Nm) {
  cmat c = cmat::Zero(Nc, Nc), m = cmat::Zero(Nm, Nm);
  c(nc, nc) = 1.0;
  m(qm, qm) = 1.0;
  return kern::kron(c, m);
}

}  // namespace

TEST_CASE("default label set stays off the photon truncation edge") {
  const auto labs = evo::default_label_set(4, 2);
  for (const auto& lab : labs) {
    CHECK(lab.n + std::abs(lab.l) <= 2);
    CHECK(lab.m + std::abs(lab.k) <= 2);
  }
  // (l,n) in {(0,0),(0,1),(0,2),(+-1,0),(+-1,1),(+-2,0)} x 9 mechanical labels
  CHECK(labs.size() == 81);
}

TEST_CASE("decomposing the steady state gives a single unit coefficient") {
  const auto p = small_weak();
  // left duals grow toward the mechanical edge, so the coefficient traces
  // keep ~1e-9 of dirt at Nm = 16; 24 levels push it below the gates
  const int Nc = 3, Nm = 24;
  cmat vac = cmat::Zero(Nc, Nc);
  vac(0, 0) = 1.0;
  const cmat rho = kern::kron(vac, thermal(p.mbar, Nm));
  const auto dec = evo::decompose(rho, evo::default_label_set(Nc, 8), p, Nc, Nm);
  CHECK(dec.t0_reconstruction_error < 1e-9);
  double off = 0.0;
  cplx unit = 0.0;
  for (const auto& t : dec.terms) {
    if (t.label.l == 0 && t.label.n == 0 && t.label.k == 0 && t.label.m == 0)
      unit = t.coefficient;
    else
      off = std::max(off, std::abs(t.coefficient));
  }
  CHECK(std::abs(unit - 1.0) < 1e-12);
  CHECK(off < 1e-10);
  // nothing moves: the steady state is the eigenvalue-zero element
  const cmat later = evo::evolve(dec, 7.0);
  CHECK(evo::trace_distance(later, rho) < 1e-9);
}

TEST_CASE("spectral evolution: trace preservation and exact photon decay") {
  const auto p = small_weak();
  // a mechanical Fock state expands with coefficients ~ sqrt(mbar/(mbar+1))^m,
  // 0.41 per level here, so a cut at 12 leaves ~2e-5 of it on the floor; the
  // trace and the photon number only see the k = m = 0 labels and stay tight
  const int Nc = 3, Nm = 16;
  const cmat rho0 = joint_fock(1, 1, Nc, Nm);
  const auto dec = evo::decompose(rho0, evo::default_label_set(Nc, 12), p, Nc, Nm);
  CHECK(dec.t0_reconstruction_error < 1e-4);
  for (double t : {0.0, 0.4, 2.0, 9.0}) {
    const cmat rho = evo::evolve(dec, t);
    const auto obs = evo::observables(rho, Nc, Nm);
    CHECK(std::abs(obs.trace - 1.0) < 1e-8);
    CHECK(std::abs(obs.photon_number - std::exp(-p.kappa * t)) < 1e-8);
    CHECK((rho - cmat(rho.adjoint())).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("spectral evolution matches direct integration") {
  const auto p = small_weak();
  // photon Fock times bath thermal: the mechanical side is exactly the
  // zero-label element, so the expansion is tight at a shallow cut and the
  // comparison isolates propagation error instead of representation error
  const int Nc = 3, Nm = 12;
  cmat cav = cmat::Zero(Nc, Nc);
  cav(1, 1) = 1.0;
  const cmat rho0 = kern::kron(cav, thermal(p.mbar, Nm));
  const auto dec = evo::decompose(rho0, evo::default_label_set(Nc, 8), p, Nc, Nm);
  const std::vector<double> times{0.3, 2.0, 6.0};
  const auto spec = evo::evolve_many(dec, times);
  const auto L = sop::build_liouvillian(p, Nc, Nm);
  const auto dirct = oracle::direct_evolve(L, rho0, times);
  // the analytic elements solve the untruncated problem, so the truncated
  // generator drags ~4e-7 of edge error into the comparison at this size
  for (size_t i = 0; i < times.size(); ++i)
    CHECK(evo::trace_distance(spec[i], dirct[i]) < 1e-6);
}

TEST_CASE("evolve_many agrees with its serial reference") {
  const auto p = small_weak();
  const int Nc = 3, Nm = 8;
  const cmat rho0 = joint_fock(1, 0, Nc, Nm);
  const auto dec = evo::decompose(rho0, evo::default_label_set(Nc, 6), p, Nc, Nm);
  const std::vector<double> times{0.1, 1.0, 3.0};
  const auto a = evo::evolve_many(dec, times);
  const auto b = evo::evolve_many_serial(dec, times);
  for (size_t i = 0; i < times.size(); ++i)
    CHECK((a[i] - b[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observables on hand-built states") {
  const int Nc = 3, Nm = 4;
  const cmat rho = joint_fock(2, 1, Nc, Nm);
  const auto obs = evo::observables(rho, Nc, Nm);
  CHECK(obs.photon_number == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(obs.phonon_number == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(obs.mech_quadrature == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(obs.purity == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(obs.trace - 1.0) < 1e-15);

  // thermal mechanics: purity of the joint state is 1/(2 mbar + 1)
  const double mbar = 0.5;
  cmat vac = cmat::Zero(Nc, Nc);
  vac(0, 0) = 1.0;
  const cmat th = kern::kron(vac, thermal(mbar, 40));
  const auto obs2 = evo::observables(th, Nc, 40);
  CHECK(obs2.phonon_number == doctest::Approx(mbar).epsilon(1e-10));
  CHECK(obs2.purity == doctest::Approx(1.0 / (2.0 * mbar + 1.0)).epsilon(1e-10));
}

TEST_CASE("trace distance") {
  const cmat a = joint_fock(0, 0, 2, 2);
  const cmat b = joint_fock(1, 0, 2, 2);
  CHECK(evo::trace_distance(a, a) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(evo::trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(evo::trace_distance(a, cmat(0.5 * a + 0.5 * b)) == doctest::Approx(0.5).epsilon(1e-13));
}
