#pragma once

#include <cstddef>
#include <vector>

namespace lcfed {

struct SymEig {
    std::vector<double> values;  // descending
    std::vector<double> vectors; // row i = eigenvector for values[i]
};

// Cyclic Jacobi eigendecomposition of a symmetric n x n matrix (row-major).
// Intended for the small Gram matrices that arise when fitting the
// projector; O(n^3) per sweep.
SymEig sym_eigen(const std::vector<double>& a, std::size_t n);

} // namespace lcfed
