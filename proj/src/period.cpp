#include "conformal/period.h"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "conformal/smith.h"

namespace conformal {

namespace {

double min_symmetric_eigenvalue(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

DualHolomorphic dual_holomorphic_basis(const Mesh& mesh, const HomologyBasis& basis, const HolomorphicBasis& holo) {
  DualHolomorphic out;
  const int n = static_cast<int>(holo.all.size());
  if (n == 0) return out;
  const IntMatrix minus_pairing = -pairing_matrix(mesh, basis);
  for (int sign : {1, -1}) {
    IntMatrix c = sign * minus_pairing;
    Eigen::MatrixXd s = holo.star * c.cast<double>();
    if (min_symmetric_eigenvalue(s) > 0.0) {
      out.C = c;
      out.c_sign = sign;
      out.S = s;
      out.coeffs = c.cast<double>();
      return out;
    }
  }
  throw Error("period: S is not positive definite for either sign of C");
}

PeriodR period_matrix_R(const IntMatrix& C, const Eigen::MatrixXd& S, double tol) {
  PeriodR out;
  const int n = static_cast<int>(C.rows());
  if (n == 0) {
    out.complex_structure = true;
    return out;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(C.cast<double>());
  if (!lu.isInvertible()) throw Error("period: C is singular");
  out.R = lu.solve(S);
  out.square_defect = (out.R * out.R + Eigen::MatrixXd::Identity(n, n)).norm();
  out.complex_structure = out.square_defect < tol;
  return out;
}

Eigen::MatrixXcd period_matrix_P(const HomologyBasis& basis, const std::vector<HolomorphicForm>& forms) {
  const int n = static_cast<int>(basis.cycles.size());
  Eigen::MatrixXcd p(n, static_cast<int>(forms.size()));
  for (int j = 0; j < static_cast<int>(forms.size()); ++j) {
    for (int i = 0; i < n; ++i) {
      p(i, j) = {integrate(forms[j].real, basis.cycles[i]), integrate(forms[j].imag, basis.cycles[i])};
    }
  }
  return p;
}

PeriodData compute_periods(const Mesh& mesh, const HomologyBasis& basis, const HolomorphicBasis& holo) {
  PeriodData out;
  const int n = static_cast<int>(holo.all.size());
  if (n == 0) return out;
  const int g = n / 2;
  DualHolomorphic dh = dual_holomorphic_basis(mesh, basis, holo);
  out.C = dh.C;
  out.c_sign = dh.c_sign;
  out.S = dh.S;
  PeriodR r = period_matrix_R(out.C, out.S);
  out.R = r.R;
  out.r_square_defect = r.square_defect;
  out.cr_defect = (out.C.cast<double>() * out.R - out.S).norm();
  out.symmetry_defect = (out.S - out.S.transpose()).norm() / out.S.norm();
  out.min_eigenvalue = min_symmetric_eigenvalue(out.S);

  out.full = period_matrix_P(basis, holo.all);
  out.independent = holo.independent;
  std::vector<HolomorphicForm> picked;
  for (int k : holo.independent) picked.push_back(holo.all[k]);
  out.P = period_matrix_P(basis, picked);
  if (basis.canonical) {
    const Eigen::MatrixXcd a = out.P.topRows(g), b = out.P.bottomRows(g);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(a.transpose());
    if (lu.isInvertible()) out.tau = lu.solve(b.transpose()).transpose();
  }
  return out;
}

EquivalenceCheck verify_equivalence(const PeriodData& first, const PeriodData& second, const IntMatrix& N,
                                    double tol) {
  EquivalenceCheck out;
  const int n = static_cast<int>(first.C.rows());
  if (second.C.rows() != n || N.rows() != n || N.cols() != n) throw Error("verify_equivalence: size mismatch");
  BigMatrix big(n, std::vector<BigInt>(n));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) big[i][k] = N(i, k);
  }
  out.determinant = static_cast<long long>(determinant(big));
  if (out.determinant != 1 && out.determinant != -1) return out;
  const Eigen::MatrixXd nd = N.cast<double>();
  const Eigen::MatrixXd ninv = nd.inverse();
  out.r_residual = (ninv * first.R * nd - second.R).norm();
  out.c_residual = (N.transpose() * first.C * N - second.C).cast<double>().norm();
  const IntMatrix j = standard_pairing(n / 2);
  if (first.C == j || first.C == IntMatrix(-j)) {
    if (second.C == first.C) {
      out.symplectic_checked = true;
      out.symplectic = N.transpose() * j * N == j;
    }
  }
  out.equivalent = out.r_residual < tol && out.c_residual < tol && out.symplectic;
  return out;
}

}  // namespace conformal
