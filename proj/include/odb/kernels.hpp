// kernels.hpp — data-parallel building blocks with serial reference twins
//
// The *_serial versions are the plain reference implementations kept for
// testing and benchmarking; the unsuffixed ones parallelize the outer loop
// with OpenMP when it is available and fall back to the same code otherwise.
#pragma once

#include <functional>
#include <vector>
#include "odb/fock.hpp"

namespace odb::kern {

using fock::cplx;
using fock::cmat;

cmat kron(const cmat& A, const cmat& B);
cmat kron_serial(const cmat& A, const cmat& B);

// Gram matrix G_{ij} = <lefts[i], rights[j]> = tr(lefts[i]^dag rights[j]),
// parallel over entries.
cmat pairwise_traces(const std::vector<cmat>& lefts, const std::vector<cmat>& rights);
cmat pairwise_traces_serial(const std::vector<cmat>& lefts, const std::vector<cmat>& rights);

// Evaluate fn(i) for i in [0, count) in parallel; results are kept in order.
std::vector<cmat> map_indexed(int count, const std::function<cmat(int)>& fn);
std::vector<cmat> map_indexed_serial(int count, const std::function<cmat(int)>& fn);

}  // namespace odb::kern
