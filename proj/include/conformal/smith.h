#pragma once

#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/SparseCore>

namespace conformal {

using BigInt = boost::multiprecision::cpp_int;
using BigMatrix = std::vector<std::vector<BigInt>>;

BigMatrix to_big(const Eigen::SparseMatrix<int>& m);

// Nonzero diagonal of the Smith normal form, d1 | d2 | ... (all positive).
// Exact; intended for small and medium matrices.
std::vector<BigInt> smith_invariant_factors(BigMatrix m);

// Rank over the integers (equivalently over Q).
int integer_rank(const Eigen::SparseMatrix<int>& m);

// Exact determinant by fraction-free (Bareiss) elimination.
BigInt determinant(BigMatrix m);

}  // namespace conformal
