// fock.hpp — truncated Fock-space operator primitives
#pragma once

#include <complex>
#include <vector>
#include <Eigen/Dense>

namespace odb::fock {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;

enum class Ordering { normal, antinormal };

// Annihilation operator b on an N-dimensional truncated space,
// <p|b|q> = sqrt(q) delta_{p,q-1}. The creation operator is b.adjoint().
cmat ladder(int dim);

// Displacement operator D(alpha) = exp(alpha b^dag - alpha^* b).
// Built on dim+buffer levels and cut back to dim x dim, since the
// exponential of the truncated generator is not unitary near the edge.
cmat displacement(cplx alpha, int dim, int buffer = 20);

// exp(eta b). b is nilpotent on the truncated space, so the series is
// finite and exp(eta b) * exp(-eta b) is exactly the identity.
cmat exp_lowering(cplx eta, int dim);

// Associated Laguerre polynomial L_m^{(k)}(x) by the three-term recurrence.
double laguerre(int m, int k, double x);

// {g(b^dag b)}_n or {g(b^dag b)}_a for g(x) = sum_i coeffs[i] x^i, using the
// monomial rule (b^dag b)^i -> b^dag^i b^i (normal) / b^i b^dag^i (antinormal).
// Both orderings give diagonal operators: <q|{g}_n|q> = sum_i g_i q!/(q-i)!
// and <q|{g}_a|q> = sum_i g_i (q+i)!/q!. Terms are accumulated in extended
// precision; the alternating sums are ill-conditioned for rapidly growing
// coefficient tails, so callers keep q within a conditioning margin.
cmat ordered_number_function(const std::vector<cplx>& coeffs, Ordering ord, int dim);

// log(n!). Factorial ratios go through this to stay finite past n ~ 170.
double log_factorial(int n);

}  // namespace odb::fock
