#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "conformal/homology.h"
#include "conformal/mesh.h"
#include "conformal/simplicial.h"

namespace conformal {

// (f, g) -> (-g, f) per face, i.e. f dx + g dy -> f dy - g dx.
FaceForm star_faceform(const FaceForm& ff);

// starred: sum_f (f p + g q) area_f, the integral of a ^ *b.
// otherwise: sum_f (f q - g p) area_f, the integral of a ^ b.
double wedge_integral(const Mesh& mesh, const FaceForm& a, const FaceForm& b, bool starred);

// Discrete Hodge star on the span of 2g closed forms dual to a homology
// basis: *w = sum_j alpha_j w_j with A alpha = b,
// a_ij = integral of w_i ^ w_j, b_i = integral of w_i ^ *w.
class HodgeStar {
 public:
  HodgeStar(const Mesh& mesh, const HomologyBasis& basis, const std::vector<OneForm>& forms);

  int size() const { return static_cast<int>(forms_.size()); }
  // A from the integer pairing I of the cycles: A = I^-T.
  const Eigen::MatrixXd& wedge_matrix() const { return a_; }
  // A assembled from face wedge integrals (cross-check).
  const Eigen::MatrixXd& wedge_matrix_numeric() const { return a_numeric_; }
  double wedge_agreement() const { return (a_ - a_numeric_).lpNorm<Eigen::Infinity>(); }

  Eigen::VectorXd rhs(const OneForm& form) const;
  Eigen::VectorXd coefficients(const OneForm& form) const;
  // Coefficients of *w_k in column k.
  const Eigen::MatrixXd& matrix() const { return star_; }
  OneForm assemble(const Eigen::VectorXd& alpha) const;
  // max |A alpha - b| over the basis forms.
  double solve_residual() const { return solve_residual_; }

 private:
  const Mesh* mesh_;
  std::vector<OneForm> forms_;
  std::vector<FaceForm> gammas_;
  Eigen::MatrixXd a_, a_numeric_, star_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double solve_residual_ = 0.0;
};

// alpha for a single form; builds the operator each call.
Eigen::VectorXd hodge_star_coeffs(const Mesh& mesh, const HomologyBasis& basis, const std::vector<OneForm>& forms,
                                  const OneForm& form);

struct HolomorphicForm {
  OneForm real;          // harmonic w_k
  OneForm imag;          // *w_k assembled from alpha
  Eigen::VectorXd alpha;
  int index = -1;        // position in the harmonic basis
};

struct HolomorphicBasis {
  std::vector<HolomorphicForm> all;  // zeta_k = w_k + i *w_k, k < 2g
  std::vector<int> independent;      // g complex-independent indices into `all`, ascending
  Eigen::MatrixXd star;              // 2g x 2g star matrix
  Eigen::MatrixXd wedge;             // integer A
  Eigen::MatrixXd wedge_numeric;     // wedge-integral A
  double wedge_agreement = 0.0;
  double star_square_defect = 0.0;   // max |star^2 + I|
  Eigen::MatrixXcd periods;          // integral of zeta_k over cycle i

  int genus() const { return static_cast<int>(all.size()) / 2; }
};

// Holomorphic forms from 2g harmonic forms dual to `basis`.
HolomorphicBasis holomorphic_forms(const Mesh& mesh, const HomologyBasis& basis,
                                   const std::vector<OneForm>& harmonic);

// Full chain on the mesh: canonical basis, dual forms, harmonic diffusion
// with cotangent weights (direct solver), then holomorphic_forms.
HolomorphicBasis holomorphic_basis(const Mesh& mesh, int threads = 1);

// Indices of `count` complex-independent columns by pivoted Gram-Schmidt.
std::vector<int> independent_columns(const Eigen::MatrixXcd& vectors, int count);

}  // namespace conformal
