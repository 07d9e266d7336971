#include "odb/superop.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "odb/kernels.hpp"

namespace odb::sop {

namespace {

bool finite(double x) { return std::isfinite(x); }

cmat eye(int d) { return cmat::Identity(d, d); }

// vec(X rho) and vec(rho X) as matrices.
cmat left_mult(const cmat& X) { return kern::kron(eye((int)X.rows()), X); }
cmat right_mult(const cmat& X) { return kern::kron(X.transpose(), eye((int)X.rows())); }

}  // namespace

void SystemParams::validate() const {
  const double vals[] = {omega, nu, chi, kappa, gamma, mbar};
  for (double v : vals)
    if (!finite(v)) throw std::invalid_argument("SystemParams: non-finite value");
  if (nu <= 0.0) throw std::invalid_argument("SystemParams: nu must be positive");
  if (kappa < 0.0 || gamma < 0.0)
    throw std::invalid_argument("SystemParams: decay rates must be nonnegative");
  if (mbar < 0.0) throw std::invalid_argument("SystemParams: mbar must be nonnegative");
}

double SystemParams::mbar_from_temperature(double nu, double T) {
  if (T <= 0.0) return 0.0;
  return 1.0 / std::expm1(nu / T);
}

cmat kron(const cmat& A, const cmat& B) { return kern::kron(A, B); }

Eigen::VectorXcd vec(const cmat& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

cmat unvec(const Eigen::VectorXcd& v, int d) {
  if ((long)v.size() != (long)d * d)
    throw std::invalid_argument("unvec: length is not d^2");
  return Eigen::Map<const cmat>(v.data(), d, d);
}

SuperOp commutator_superop(const cmat& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("commutator_superop: non-square");
  return {(int)X.rows(), left_mult(X) - right_mult(X)};
}

SuperOp dissipator(const cmat& X, bool adjoint) {
  if (X.rows() != X.cols()) throw std::invalid_argument("dissipator: non-square");
  const int d = (int)X.rows();
  const cmat XdX = X.adjoint() * X;
  cmat m = 2.0 * kern::kron(X.conjugate(), X) - left_mult(XdX) - right_mult(XdX);
  if (adjoint) m = m.adjoint().eval();
  return {d, std::move(m)};
}

cmat build_hamiltonian(const SystemParams& p, int Nc, int Nm) {
  p.validate();
  if (Nc < 1 || Nm < 1) throw std::invalid_argument("build_hamiltonian: dims must be >= 1");
  const cmat a = kern::kron(fock::ladder(Nc), eye(Nm));
  const cmat b = kern::kron(eye(Nc), fock::ladder(Nm));
  const cmat na = a.adjoint() * a;
  const cmat nb = b.adjoint() * b;
  return p.omega * na + p.nu * nb - p.chi * na * (b + b.adjoint());
}

SuperOp build_liouvillian(const SystemParams& p, int Nc, int Nm, Part part) {
  p.validate();
  if (Nc < 1 || Nm < 1) throw std::invalid_argument("build_liouvillian: dims must be >= 1");
  const int d = Nc * Nm;
  const cmat a = kern::kron(fock::ladder(Nc), eye(Nm));

  if (part == Part::J)
    return {d, cmat(p.kappa * kern::kron(a.conjugate(), a))};

  const cplx I(0.0, 1.0);
  const cmat H = build_hamiltonian(p, Nc, Nm);
  cmat L = -I * commutator_superop(H).mat + 0.5 * p.kappa * dissipator(a).mat;

  const cmat bj = kern::kron(eye(Nc), fock::ladder(Nm));
  if (p.variant == Variant::weak) {
    L += 0.5 * p.gamma * (p.mbar + 1.0) * dissipator(bj).mat;
    L += 0.5 * p.gamma * p.mbar * dissipator(cmat(bj.adjoint())).mat;
  } else {
    // Dressed-state channels: the mechanical jump operator picks up the
    // photon-number shift, and the photon number itself dephases.
    const cmat na = a.adjoint() * a;
    const cmat B = bj - (p.chi / p.nu) * na;
    L += 0.5 * p.gamma * (p.mbar + 1.0) * dissipator(B).mat;
    L += 0.5 * p.gamma * p.mbar * dissipator(cmat(B.adjoint())).mat;
    L += dsme_dephasing_rate(p) * dissipator(na).mat;
  }

  if (part == Part::M) L -= p.kappa * kern::kron(a.conjugate(), a);
  return {d, std::move(L)};
}

cplx lambda_C(const SystemParams& p, int l, int n) {
  return cplx(-(n + std::abs(l) / 2.0) * p.kappa, -l * p.omega);
}

SuperOp build_M_ln(const SystemParams& p, int l, int n, int Nm, bool adjoint) {
  p.validate();
  if (Nm < 1) throw std::invalid_argument("build_M_ln: Nm must be >= 1");
  if (n < 0 || l < 0) throw std::invalid_argument("build_M_ln: need n >= 0 and l >= 0");

  const cplx I(0.0, 1.0);
  const cmat b = fock::ladder(Nm);
  const cmat nb = b.adjoint() * b;
  const cmat Q = b + b.adjoint();
  const cmat id2 = cmat::Identity(Nm * Nm, Nm * Nm);

  cmat M = -I * p.nu * commutator_superop(nb).mat
         + I * double(n) * p.chi * commutator_superop(Q).mat
         + I * double(l) * p.chi * left_mult(Q)
         + lambda_C(p, l, n) * id2;

  if (p.variant == Variant::weak) {
    M += 0.5 * p.gamma * (p.mbar + 1.0) * dissipator(b).mat;
    M += 0.5 * p.gamma * p.mbar * dissipator(cmat(b.adjoint())).mat;
  } else {
    // The photon-number shift in B = b - (chi/nu) a^dag a acts as different
    // scalars on the two sides of the coherence sector, so the sandwich
    // terms are cross products of B_{n+l} and B_n rather than a single
    // dissipator.
    const double beta = p.chi / p.nu;
    const cmat Bnl = b - double(n + l) * beta * eye(Nm);
    const cmat Bn = b - double(n) * beta * eye(Nm);
    M += 0.5 * p.gamma * (p.mbar + 1.0) *
         (2.0 * kern::kron(Bn.conjugate(), Bnl)
          - left_mult(cmat(Bnl.adjoint() * Bnl)) - right_mult(cmat(Bn.adjoint() * Bn)));
    M += 0.5 * p.gamma * p.mbar *
         (2.0 * kern::kron(Bn.transpose(), cmat(Bnl.adjoint()))
          - left_mult(cmat(Bnl * Bnl.adjoint())) - right_mult(cmat(Bn * Bn.adjoint())));
    M += -double(l) * double(l) * dsme_dephasing_rate(p) * id2;
  }

  if (adjoint) M = M.adjoint().eval();
  return {Nm, std::move(M)};
}

double dsme_dephasing_rate(const SystemParams& p) {
  if (p.mbar <= 0.0) {
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true))
      std::cerr << "warning: dsme dephasing rate requested at mbar = 0; using the "
                   "zero-temperature limit 0 (the dressed-state derivation assumes "
                   "a thermal mechanical bath)\n";
    return 0.0;
  }
  return 4.0 * p.chi * p.chi * p.gamma /
         (p.nu * p.nu * std::log((p.mbar + 1.0) / p.mbar));
}

}  // namespace odb::sop
