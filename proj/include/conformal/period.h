#pragma once

#include <vector>

#include <Eigen/Core>

#include "conformal/hodge.h"
#include "conformal/homology.h"

namespace conformal {

// Real-linear recombination of the holomorphic forms zeta_k = w_k + i *w_k
// whose real periods are the intersection matrix C.
struct DualHolomorphic {
  IntMatrix C;
  // C = c_sign * (-pairing); the sign is chosen so that S comes out positive
  // definite.
  int c_sign = 1;
  Eigen::MatrixXd S;      // imaginary periods
  Eigen::MatrixXd coeffs; // tau_j = sum_k w_k coeffs(k, j)
};

// S = Star C; throws when neither sign of C gives a positive definite S.
DualHolomorphic dual_holomorphic_basis(const Mesh& mesh, const HomologyBasis& basis, const HolomorphicBasis& holo);

struct PeriodR {
  Eigen::MatrixXd R;
  double square_defect = 0.0;  // ||R^2 + I||_F
  bool complex_structure = false;  // square_defect below the tolerance
};

// R = C^-1 S.
PeriodR period_matrix_R(const IntMatrix& C, const Eigen::MatrixXd& S, double tol = 1e-3);

// Integrals of each form (real + i imag) over each cycle: 2g x forms.size().
Eigen::MatrixXcd period_matrix_P(const HomologyBasis& basis, const std::vector<HolomorphicForm>& forms);

struct PeriodData {
  IntMatrix C;
  int c_sign = 1;
  Eigen::MatrixXd S, R;
  Eigen::MatrixXcd P;       // 2g x g over the complex-independent forms
  Eigen::MatrixXcd full;    // 2g x 2g over all zeta_k
  Eigen::MatrixXcd tau;     // g x g: (b-periods)(a-periods)^-1 of P
  std::vector<int> independent;
  double symmetry_defect = 0.0;    // ||S - S^T||_F / ||S||_F
  double min_eigenvalue = 0.0;     // of the symmetric part of S
  double r_square_defect = 0.0;    // ||R^2 + I||_F
  double cr_defect = 0.0;          // ||C R - S||_F

  int genus() const { return static_cast<int>(C.rows()) / 2; }
};

PeriodData compute_periods(const Mesh& mesh, const HomologyBasis& basis, const HolomorphicBasis& holo);

struct EquivalenceCheck {
  bool equivalent = false;
  double r_residual = 0.0;  // ||N^-1 R1 N - R2||_F
  double c_residual = 0.0;  // ||N^T C1 N - C2||_F
  long long determinant = 0;
  bool symplectic = true;   // N^T J N = J; only checked when both C are standard
  bool symplectic_checked = false;
};

// N expresses the second basis in the first: e2_j = sum_i N_ij e1_i.
EquivalenceCheck verify_equivalence(const PeriodData& first, const PeriodData& second, const IntMatrix& N,
                                    double tol = 1e-3);

}  // namespace conformal
