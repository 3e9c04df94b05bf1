#include "conformal/smith.h"

#include <stdexcept>

namespace conformal {

BigMatrix to_big(const Eigen::SparseMatrix<int>& m) {
  BigMatrix out(m.rows(), std::vector<BigInt>(m.cols(), 0));
  for (int k = 0; k < m.outerSize(); ++k) {
    for (Eigen::SparseMatrix<int>::InnerIterator it(m, k); it; ++it) out[it.row()][it.col()] = it.value();
  }
  return out;
}

namespace {

// Pivot with the smallest magnitude in the trailing block, ties broken by
// the Markowitz count so elimination on boundary matrices stays sparse.
bool find_pivot(const BigMatrix& m, std::size_t t, std::size_t& pr, std::size_t& pc) {
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  std::vector<std::size_t> row_nnz(rows, 0), col_nnz(cols, 0);
  for (std::size_t i = t; i < rows; ++i) {
    for (std::size_t j = t; j < cols; ++j) {
      if (m[i][j] != 0) {
        ++row_nnz[i];
        ++col_nnz[j];
      }
    }
  }
  bool found = false;
  BigInt best_abs;
  std::size_t best_cost = 0;
  for (std::size_t i = t; i < rows; ++i) {
    if (row_nnz[i] == 0) continue;
    for (std::size_t j = t; j < cols; ++j) {
      if (m[i][j] == 0) continue;
      BigInt a = abs(m[i][j]);
      std::size_t cost = (row_nnz[i] - 1) * (col_nnz[j] - 1);
      if (!found || a < best_abs || (a == best_abs && cost < best_cost)) {
        found = true;
        best_abs = a;
        best_cost = cost;
        pr = i;
        pc = j;
      }
    }
  }
  return found;
}

}  // namespace

std::vector<BigInt> smith_invariant_factors(BigMatrix m) {
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  std::vector<BigInt> diag;
  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    std::size_t pr = 0, pc = 0;
    if (!find_pivot(m, t, pr, pc)) break;
    std::swap(m[t], m[pr]);
    for (std::size_t i = 0; i < rows; ++i) std::swap(m[i][t], m[i][pc]);
    for (;;) {
      bool clean = true;
      // Column t below the pivot.
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (m[i][t] == 0) continue;
        BigInt q = m[i][t] / m[t][t];
        for (std::size_t j = t; j < cols; ++j) {
          if (m[t][j] != 0) m[i][j] -= q * m[t][j];
        }
        if (m[i][t] != 0) {
          std::swap(m[t], m[i]);
          clean = false;
        }
      }
      // Row t right of the pivot.
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (m[t][j] == 0) continue;
        BigInt q = m[t][j] / m[t][t];
        for (std::size_t i = t; i < rows; ++i) {
          if (m[i][t] != 0) m[i][j] -= q * m[i][t];
        }
        if (m[t][j] != 0) {
          for (std::size_t i = 0; i < rows; ++i) std::swap(m[i][t], m[i][j]);
          clean = false;
        }
      }
      if (!clean) continue;
      // Divisibility: fold an offending row into row t and repeat.
      bool divides = true;
      for (std::size_t i = t + 1; i < rows && divides; ++i) {
        for (std::size_t j = t + 1; j < cols; ++j) {
          if (m[i][j] != 0 && m[i][j] % m[t][t] != 0) {
            for (std::size_t k = t; k < cols; ++k) m[t][k] += m[i][k];
            divides = false;
            break;
          }
        }
      }
      if (divides) break;
    }
    diag.push_back(abs(m[t][t]));
  }
  return diag;
}

int integer_rank(const Eigen::SparseMatrix<int>& m) {
  return static_cast<int>(smith_invariant_factors(to_big(m)).size());
}

BigInt determinant(BigMatrix m) {
  const std::size_t n = m.size();
  if (n == 0) return 1;
  if (m[0].size() != n) throw std::invalid_argument("determinant of a non-square matrix");
  int sign = 1;
  BigInt prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t r = k + 1;
      while (r < n && m[r][k] == 0) ++r;
      if (r == n) return 0;
      std::swap(m[k], m[r]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      }
    }
    prev = m[k][k];
  }
  return sign * m[n - 1][n - 1];
}

}  // namespace conformal
