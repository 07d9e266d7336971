// fock.cpp — truncated Fock-space operator primitives
#include "odb/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace odb::fock {

cmat ladder(int dim) {
    if (dim < 1) throw std::invalid_argument("ladder: dim must be >= 1");
    cmat b = cmat::Zero(dim, dim);
    for (int q = 1; q < dim; ++q) b(q - 1, q) = std::sqrt(double(q));
    return b;
}

cmat displacement(cplx alpha, int dim, int buffer) {
    if (dim < 1) throw std::invalid_argument("displacement: dim must be >= 1");
    if (buffer < 0) throw std::invalid_argument("displacement: buffer must be >= 0");
    const int big = dim + buffer;
    if (alpha == cplx(0.0, 0.0)) return cmat::Identity(dim, dim);
    cmat b = ladder(big);
    // alpha b^dag - alpha^* b is anti-Hermitian; diagonalize i*(that) Hermitianly.
    cmat h = cplx(0, 1) * (alpha * b.adjoint() - std::conj(alpha) * b);
    Eigen::SelfAdjointEigenSolver<cmat> es(h);
    Eigen::VectorXcd phases = (cplx(0, -1) * es.eigenvalues().array()).exp();
    cmat full = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return full.topLeftCorner(dim, dim);
}

cmat exp_lowering(cplx eta, int dim) {
    if (dim < 1) throw std::invalid_argument("exp_lowering: dim must be >= 1");
    // <i| exp(eta b) |j> = eta^(j-i)/(j-i)! sqrt(j!/i!) for j >= i; the series
    // terminates, so filling entries directly is exact and O(dim^2).
    cmat sum = cmat::Identity(dim, dim);
    for (int i = 0; i < dim; ++i) {
        cplx entry = 1.0;
        for (int j = i + 1; j < dim; ++j) {
            entry *= eta * std::sqrt(double(j)) / double(j - i);
            sum(i, j) = entry;
        }
    }
    return sum;
}

double laguerre(int m, int k, double x) {
    if (m < 0) throw std::invalid_argument("laguerre: m must be >= 0");
    if (k < 0) throw std::invalid_argument("laguerre: k must be >= 0");
    double lm1 = 1.0;            // L_0
    if (m == 0) return lm1;
    double lm = k + 1.0 - x;     // L_1
    for (int i = 1; i < m; ++i) {
        double next = ((2.0 * i + k + 1.0 - x) * lm - (i + k) * lm1) / (i + 1.0);
        lm1 = lm;
        lm = next;
    }
    return lm;
}

cmat ordered_number_function(const std::vector<cplx>& coeffs, Ordering ord, int dim) {
    if (dim < 1) throw std::invalid_argument("ordered_number_function: dim must be >= 1");
    cmat out = cmat::Zero(dim, dim);
    using lcplx = std::complex<long double>;
    for (int q = 0; q < dim; ++q) {
        lcplx acc(0.0L, 0.0L);
        long double ratio = 1.0L;  // q!/(q-i)! or (q+i)!/q!, built incrementally
        for (size_t i = 0; i < coeffs.size(); ++i) {
            if (i > 0) {
                if (ord == Ordering::normal) {
                    if (int(i) > q) break;  // q!/(q-i)! vanishes beyond i = q
                    ratio *= (long double)(q - int(i) + 1);
                } else {
                    ratio *= (long double)(q + int(i));
                }
            }
            acc += lcplx(coeffs[i].real(), coeffs[i].imag()) * ratio;
        }
        out(q, q) = cplx(double(acc.real()), double(acc.imag()));
    }
    return out;
}

double log_factorial(int n) {
    if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
    return std::lgamma(double(n) + 1.0);
}

}  // namespace odb::fock
