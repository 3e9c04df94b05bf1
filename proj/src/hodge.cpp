#include "conformal/hodge.h"

#include <algorithm>
#include <cmath>

#include "conformal/cohomology.h"
#include "conformal/harmonic.h"

namespace conformal {

FaceForm star_faceform(const FaceForm& ff) {
  FaceForm out;
  out.coeffs.reserve(ff.coeffs.size());
  for (const Vec2& c : ff.coeffs) out.coeffs.emplace_back(-c.y(), c.x());
  return out;
}

double wedge_integral(const Mesh& mesh, const FaceForm& a, const FaceForm& b, bool starred) {
  double sum = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec2& x = a.coeffs[f];
    const Vec2& y = b.coeffs[f];
    const double density = starred ? x.x() * y.x() + x.y() * y.y() : x.x() * y.y() - x.y() * y.x();
    sum += density * face_area(mesh, f);
  }
  return sum;
}

HodgeStar::HodgeStar(const Mesh& mesh, const HomologyBasis& basis, const std::vector<OneForm>& forms)
    : mesh_(&mesh), forms_(forms) {
  const int n = static_cast<int>(forms.size());
  if (n != static_cast<int>(basis.cycles.size())) throw Error("hodge star: forms and cycles differ in number");
  if (n == 0) return;
  gammas_.reserve(n);
  for (const OneForm& w : forms) gammas_.push_back(gamma(mesh, w));

  a_numeric_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a_numeric_(i, j) = wedge_integral(mesh, gammas_[i], gammas_[j], false);
  }
  const Eigen::MatrixXd pairing = pairing_matrix(mesh, basis).cast<double>();
  Eigen::FullPivLU<Eigen::MatrixXd> plu(pairing);
  if (!plu.isInvertible()) throw Error("hodge star: cycles are not a basis (singular intersection matrix)");
  a_ = plu.inverse().transpose();
  lu_.compute(a_);

  star_.resize(n, n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd b = rhs(forms[k]);
    Eigen::VectorXd alpha = lu_.solve(b);
    star_.col(k) = alpha;
    solve_residual_ = std::max(solve_residual_, (a_ * alpha - b).lpNorm<Eigen::Infinity>());
  }
}

Eigen::VectorXd HodgeStar::rhs(const OneForm& form) const {
  const FaceForm g = gamma(*mesh_, form);
  Eigen::VectorXd b(size());
  for (int i = 0; i < size(); ++i) b(i) = wedge_integral(*mesh_, gammas_[i], g, true);
  return b;
}

Eigen::VectorXd HodgeStar::coefficients(const OneForm& form) const {
  if (size() == 0) return {};
  return lu_.solve(rhs(form));
}

OneForm HodgeStar::assemble(const Eigen::VectorXd& alpha) const {
  OneForm out(mesh_->num_edges());
  for (int j = 0; j < size(); ++j) {
    for (int e = 0; e < mesh_->num_edges(); ++e) out.values[e] += alpha(j) * forms_[j].values[e];
  }
  return out;
}

Eigen::VectorXd hodge_star_coeffs(const Mesh& mesh, const HomologyBasis& basis, const std::vector<OneForm>& forms,
                                  const OneForm& form) {
  return HodgeStar(mesh, basis, forms).coefficients(form);
}

std::vector<int> independent_columns(const Eigen::MatrixXcd& vectors, int count) {
  const int n = static_cast<int>(vectors.cols());
  std::vector<Eigen::VectorXcd> rest(n);
  double scale = 0.0;
  for (int k = 0; k < n; ++k) {
    rest[k] = vectors.col(k);
    scale = std::max(scale, rest[k].norm());
  }
  std::vector<char> used(n, 0);
  std::vector<int> picked;
  for (int step = 0; step < count; ++step) {
    int best = -1;
    double best_norm = 0.0;
    for (int k = 0; k < n; ++k) {
      if (used[k]) continue;
      double nk = rest[k].norm();
      if (nk > best_norm * (1.0 + 1e-9)) {
        best = k;
        best_norm = nk;
      }
    }
    if (best < 0 || best_norm <= 1e-8 * scale) throw Error("holomorphic forms: complex rank below genus");
    used[best] = 1;
    picked.push_back(best);
    const Eigen::VectorXcd q = rest[best] / best_norm;
    for (int k = 0; k < n; ++k) {
      if (!used[k]) rest[k] -= q * q.dot(rest[k]);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

HolomorphicBasis holomorphic_forms(const Mesh& mesh, const HomologyBasis& basis,
                                   const std::vector<OneForm>& harmonic) {
  HolomorphicBasis out;
  const int n = static_cast<int>(harmonic.size());
  if (n == 0) return out;
  HodgeStar star(mesh, basis, harmonic);
  out.star = star.matrix();
  out.wedge = star.wedge_matrix();
  out.wedge_numeric = star.wedge_matrix_numeric();
  out.wedge_agreement = star.wedge_agreement();
  out.star_square_defect =
      (out.star * out.star + Eigen::MatrixXd::Identity(n, n)).lpNorm<Eigen::Infinity>();
  out.periods.resize(n, n);
  for (int k = 0; k < n; ++k) {
    HolomorphicForm z;
    z.real = harmonic[k];
    z.alpha = out.star.col(k);
    z.imag = star.assemble(z.alpha);
    z.index = k;
    for (int i = 0; i < n; ++i) {
      out.periods(i, k) = {integrate(z.real, basis.cycles[i]), integrate(z.imag, basis.cycles[i])};
    }
    out.all.push_back(std::move(z));
  }
  out.independent = independent_columns(out.periods, n / 2);
  return out;
}

HolomorphicBasis holomorphic_basis(const Mesh& mesh, int threads) {
  HomologyBasis basis = homology_basis(mesh);
  if (basis.genus() == 0) return {};
  DualBasis dual = dual_basis(mesh, basis, threads);
  std::vector<HarmonicForm> h = diffuse_all(mesh, cotan_weights(mesh), dual.forms, {}, threads);
  std::vector<OneForm> forms;
  for (auto& f : h) forms.push_back(std::move(f.form));
  return holomorphic_forms(mesh, basis, forms);
}

}  // namespace conformal
