#include "conformal/harmonic.h"

#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "conformal/parallel.h"

namespace conformal {

double string_energy_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<double>& f) {
  double e = 0.0;
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    const double d = f[v] - f[u];
    e += w[i] * d * d;
  }
  return e;
}

double string_energy_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<Vec3>& f) {
  double e = 0.0;
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    e += w[i] * (f[v] - f[u]).squaredNorm();
  }
  return e;
}

double string_energy_1(const Mesh& mesh, const EdgeWeights& w, const OneForm& form) {
  double e = 0.0;
  for (int i = 0; i < mesh.num_edges(); ++i) e += w[i] * form.values[i] * form.values[i];
  return e;
}

std::vector<double> laplacian_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<double>& f) {
  std::vector<double> out(mesh.num_vertices(), 0.0);
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    const double d = w[i] * (f[u] - f[v]);
    out[u] += d;
    out[v] -= d;
  }
  return out;
}

std::vector<Vec3> laplacian_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<Vec3>& f) {
  std::vector<Vec3> out(mesh.num_vertices(), Vec3::Zero());
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    const Vec3 d = w[i] * (f[u] - f[v]);
    out[u] += d;
    out[v] -= d;
  }
  return out;
}

std::vector<double> divergence(const Mesh& mesh, const EdgeWeights& w, const OneForm& form) {
  std::vector<double> out(mesh.num_vertices(), 0.0);
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    const double d = w[i] * form.values[i];
    out[u] += d;
    out[v] -= d;
  }
  return out;
}

double harmonic_residual(const Mesh& mesh, const EdgeWeights& w, const OneForm& form) {
  double r = 0.0;
  for (double d : divergence(mesh, w, form)) r = std::max(r, std::abs(d));
  return r;
}

HarmonicSolver parse_harmonic_solver(const std::string& name) {
  if (name == "direct") return HarmonicSolver::direct;
  if (name == "descent") return HarmonicSolver::descent;
  throw Error("unknown solver '" + name + "' (expected direct or descent)");
}

std::string to_string(HarmonicSolver solver) {
  return solver == HarmonicSolver::direct ? "direct" : "descent";
}

struct PinnedLaplacian::Impl {
  int pinned = 0;
  int n = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

PinnedLaplacian::PinnedLaplacian(const Mesh& mesh, const EdgeWeights& w, int pinned) : impl_(std::make_unique<Impl>()) {
  const int n = mesh.num_vertices();
  if (pinned < 0 || pinned >= n) throw Error("pinned vertex out of range");
  impl_->pinned = pinned;
  impl_->n = n;
  auto idx = [&](int v) { return v < pinned ? v : v - 1; };
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    const double k = w[i];
    if (u != pinned) trip.emplace_back(idx(u), idx(u), k);
    if (v != pinned) trip.emplace_back(idx(v), idx(v), k);
    if (u != pinned && v != pinned) {
      trip.emplace_back(idx(u), idx(v), -k);
      trip.emplace_back(idx(v), idx(u), -k);
    }
  }
  Eigen::SparseMatrix<double> l(n - 1, n - 1);
  l.setFromTriplets(trip.begin(), trip.end());
  impl_->ldlt.compute(l);
  if (impl_->ldlt.info() != Eigen::Success) throw Error("direct solve: pinned Laplacian is singular");
}

PinnedLaplacian::~PinnedLaplacian() = default;
PinnedLaplacian::PinnedLaplacian(PinnedLaplacian&&) noexcept = default;

std::vector<double> PinnedLaplacian::solve(const std::vector<double>& rhs) const {
  const int n = impl_->n, p = impl_->pinned;
  Eigen::VectorXd b(n - 1);
  for (int v = 0; v < n; ++v) {
    if (v != p) b(v < p ? v : v - 1) = rhs[v];
  }
  Eigen::VectorXd x = impl_->ldlt.solve(b);
  if (impl_->ldlt.info() != Eigen::Success) throw Error("direct solve failed");
  std::vector<double> out(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if (v != p) out[v] = x(v < p ? v : v - 1);
  }
  return out;
}

namespace {

OneForm add_coboundary(const Mesh& mesh, const OneForm& form, const std::vector<double>& f) {
  OneForm out = form;
  for (int i = 0; i < mesh.num_edges(); ++i) {
    auto [u, v] = mesh.edge_vertices(i);
    out.values[i] += f[v] - f[u];
  }
  return out;
}

void finish(const Mesh& mesh, const EdgeWeights& w, const OneForm& form, const HarmonicOptions& options,
            HarmonicForm& h) {
  const double shift = h.potential[options.pinned];
  for (double& x : h.potential) x -= shift;
  h.form = add_coboundary(mesh, form, h.potential);
  h.residual = harmonic_residual(mesh, w, h.form);
  h.energy = string_energy_1(mesh, w, h.form);
}

HarmonicForm descend(const Mesh& mesh, const EdgeWeights& w, const OneForm& form, const HarmonicOptions& options) {
  const int nv = mesh.num_vertices();
  double step = options.step;
  if (step <= 0.0) {
    std::vector<double> deg(nv, 0.0);
    for (int i = 0; i < mesh.num_edges(); ++i) {
      auto [u, v] = mesh.edge_vertices(i);
      deg[u] += std::abs(w[i]);
      deg[v] += std::abs(w[i]);
    }
    double max_deg = 0.0;
    for (double d : deg) max_deg = std::max(max_deg, d);
    if (max_deg <= 0.0) throw Error("descent: all weights are zero");
    step = 0.5 / max_deg;
  }
  HarmonicForm h;
  h.potential.assign(nv, 0.0);
  std::vector<double> div(nv);
  double prev = std::numeric_limits<double>::infinity();
  double prev_decrease = 0.0;
  for (int it = 0;; ++it) {
    std::fill(div.begin(), div.end(), 0.0);
    double energy = 0.0;
    for (int i = 0; i < mesh.num_edges(); ++i) {
      auto [u, v] = mesh.edge_vertices(i);
      const double o = form.values[i] + h.potential[v] - h.potential[u];
      energy += w[i] * o * o;
      div[u] += w[i] * o;
      div[v] -= w[i] * o;
    }
    h.energy_trace.push_back(energy);
    h.iterations = it;
    if (!std::isfinite(energy) || energy > prev * (1.0 + 1e-12) + 1e-300) {
      throw DivergenceError("descent diverged at iteration " + std::to_string(it) + " (energy " +
                                std::to_string(energy) + ", previous " + std::to_string(prev) + ")",
                            h.energy_trace);
    }
    double residual = 0.0;
    for (double d : div) residual = std::max(residual, std::abs(d));
    // Remaining decrease extrapolated from the geometric contraction of
    // consecutive decreases.
    const double decrease = prev - energy;
    bool flat = it > 0 && decrease <= 0.0;
    if (it > 1 && decrease > 0.0 && prev_decrease > 0.0) {
      const double rho = decrease / prev_decrease;
      flat = rho < 1.0 && decrease * rho / (1.0 - rho) < options.energy_tol * energy;
    }
    if (residual <= options.tol || flat) {
      h.converged = true;
      break;
    }
    if (it >= options.max_iterations) break;
    prev_decrease = decrease;
    prev = energy;
    for (int v = 0; v < nv; ++v) h.potential[v] += step * div[v];
  }
  return h;
}

}  // namespace

HarmonicForm diffuse_to_harmonic(const Mesh& mesh, const EdgeWeights& w, const OneForm& form,
                                 const HarmonicOptions& options) {
  if (options.solver == HarmonicSolver::direct) {
    PinnedLaplacian factor(mesh, w, options.pinned);
    return diffuse_to_harmonic(mesh, w, form, options, &factor);
  }
  return diffuse_to_harmonic(mesh, w, form, options, nullptr);
}

HarmonicForm diffuse_to_harmonic(const Mesh& mesh, const EdgeWeights& w, const OneForm& form,
                                 const HarmonicOptions& options, const PinnedLaplacian* factor) {
  if (static_cast<int>(form.values.size()) != mesh.num_edges()) throw Error("form size does not match the mesh");
  if (options.pinned < 0 || options.pinned >= mesh.num_vertices()) throw Error("pinned vertex out of range");
  HarmonicForm h;
  if (options.solver == HarmonicSolver::descent) {
    h = descend(mesh, w, form, options);
  } else {
    if (factor == nullptr) throw Error("direct solve needs a factored Laplacian");
    h.potential = factor->solve(divergence(mesh, w, form));
    h.iterations = 1;
    finish(mesh, w, form, options, h);
    // iterative refinement for badly scaled weights
    for (int pass = 0; pass < 3 && h.residual > options.tol; ++pass) {
      std::vector<double> c = factor->solve(divergence(mesh, w, h.form));
      for (std::size_t v = 0; v < c.size(); ++v) h.potential[v] += c[v];
      finish(mesh, w, form, options, h);
      ++h.iterations;
    }
    h.converged = h.residual <= options.tol;
    return h;
  }
  finish(mesh, w, form, options, h);
  return h;
}

std::vector<HarmonicForm> diffuse_all(const Mesh& mesh, const EdgeWeights& w, const std::vector<OneForm>& forms,
                                      const HarmonicOptions& options, int threads) {
  std::unique_ptr<PinnedLaplacian> factor;
  if (options.solver == HarmonicSolver::direct && !forms.empty()) {
    factor = std::make_unique<PinnedLaplacian>(mesh, w, options.pinned);
  }
  std::vector<HarmonicForm> out(forms.size());
  parallel_for(static_cast<int>(forms.size()), threads, [&](int k) {
    out[k] = diffuse_to_harmonic(mesh, w, forms[k], options, factor.get());
    out[k].class_index = k;
  });
  return out;
}

}  // namespace conformal
