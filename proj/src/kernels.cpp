#include "odb/kernels.hpp"

#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace odb::kern {

cmat kron_serial(const cmat& A, const cmat& B) {
  const long ar = A.rows(), ac = A.cols(), br = B.rows(), bc = B.cols();
  cmat out(ar * br, ac * bc);
  for (long i = 0; i < ar; ++i)
    for (long j = 0; j < ac; ++j)
      out.block(i * br, j * bc, br, bc) = A(i, j) * B;
  return out;
}

cmat kron(const cmat& A, const cmat& B) {
  const long ar = A.rows(), ac = A.cols(), br = B.rows(), bc = B.cols();
  cmat out(ar * br, ac * bc);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < ar; ++i)
    for (long j = 0; j < ac; ++j)
      out.block(i * br, j * bc, br, bc) = A(i, j) * B;
  return out;
}

namespace {

void check_shapes(const std::vector<cmat>& lefts, const std::vector<cmat>& rights) {
  for (const auto& m : lefts)
    if (m.rows() != lefts[0].rows() || m.cols() != lefts[0].cols())
      throw std::invalid_argument("pairwise_traces: ragged left set");
  for (const auto& m : rights)
    if (m.rows() != lefts[0].rows() || m.cols() != lefts[0].cols())
      throw std::invalid_argument("pairwise_traces: shape mismatch");
}

}  // namespace

cmat pairwise_traces_serial(const std::vector<cmat>& lefts, const std::vector<cmat>& rights) {
  const long nl = (long)lefts.size(), nr = (long)rights.size();
  cmat g(nl, nr);
  if (nl == 0 || nr == 0) return g;
  check_shapes(lefts, rights);
  for (long i = 0; i < nl; ++i)
    for (long j = 0; j < nr; ++j)
      g(i, j) = (lefts[i].adjoint() * rights[j]).trace();
  return g;
}

cmat pairwise_traces(const std::vector<cmat>& lefts, const std::vector<cmat>& rights) {
  const long nl = (long)lefts.size(), nr = (long)rights.size();
  cmat g(nl, nr);
  if (nl == 0 || nr == 0) return g;
  check_shapes(lefts, rights);
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (long i = 0; i < nl; ++i)
    for (long j = 0; j < nr; ++j)
      g(i, j) = (lefts[i].adjoint() * rights[j]).trace();
  return g;
}

std::vector<cmat> map_indexed_serial(int count, const std::function<cmat(int)>& fn) {
  std::vector<cmat> out((size_t)count);
  for (int i = 0; i < count; ++i) out[(size_t)i] = fn(i);
  return out;
}

std::vector<cmat> map_indexed(int count, const std::function<cmat(int)>& fn) {
  std::vector<cmat> out((size_t)count);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i) out[(size_t)i] = fn(i);
  return out;
}

}  // namespace odb::kern
