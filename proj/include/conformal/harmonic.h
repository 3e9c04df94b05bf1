#pragma once

#include <memory>
#include <string>
#include <vector>

#include "conformal/mesh.h"
#include "conformal/simplicial.h"

namespace conformal {

// A descent that increased its energy or produced non-finite values.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

// sum_e k_e |f(head) - f(tail)|^2
double string_energy_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<double>& f);
double string_energy_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<Vec3>& f);
// sum_e k_e omega_e^2
double string_energy_1(const Mesh& mesh, const EdgeWeights& w, const OneForm& form);

// (Lf)(u) = sum_v k_uv (f(u) - f(v)); half the gradient of string_energy_0.
std::vector<double> laplacian_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<double>& f);
std::vector<Vec3> laplacian_0(const Mesh& mesh, const EdgeWeights& w, const std::vector<Vec3>& f);

// div(u) = sum_v k_uv omega[u,v]. A closed form is harmonic iff div = 0.
std::vector<double> divergence(const Mesh& mesh, const EdgeWeights& w, const OneForm& form);
double harmonic_residual(const Mesh& mesh, const EdgeWeights& w, const OneForm& form);

enum class HarmonicSolver { direct, descent };
HarmonicSolver parse_harmonic_solver(const std::string& name);
std::string to_string(HarmonicSolver solver);

struct HarmonicOptions {
  HarmonicSolver solver = HarmonicSolver::direct;
  double tol = 1e-8;             // on harmonic_residual
  double energy_tol = 1e-10;     // descent: stop when the extrapolated remaining decrease is below this, relative
  int max_iterations = 2000000;  // descent
  double step = 0.0;             // descent; 0 -> 0.5 / max weighted degree
  int pinned = 0;
};

struct HarmonicForm {
  OneForm form;                  // omega + delta F
  std::vector<double> potential; // F, zero at the pinned vertex
  double residual = 0.0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // descent only, one entry per iteration plus the start
  int class_index = -1;
};

// Weighted graph Laplacian with one vertex pinned, factored once.
class PinnedLaplacian {
 public:
  PinnedLaplacian(const Mesh& mesh, const EdgeWeights& w, int pinned = 0);
  ~PinnedLaplacian();
  PinnedLaplacian(PinnedLaplacian&&) noexcept;
  // Solves L F = rhs with F(pinned) = 0; rhs must sum to zero.
  std::vector<double> solve(const std::vector<double>& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Harmonic representative omega + delta F of the class of a closed form.
HarmonicForm diffuse_to_harmonic(const Mesh& mesh, const EdgeWeights& w, const OneForm& form,
                                 const HarmonicOptions& options = {});
HarmonicForm diffuse_to_harmonic(const Mesh& mesh, const EdgeWeights& w, const OneForm& form,
                                 const HarmonicOptions& options, const PinnedLaplacian* factor);

// Diffuses each form; one factorization is shared by the direct solves.
std::vector<HarmonicForm> diffuse_all(const Mesh& mesh, const EdgeWeights& w, const std::vector<OneForm>& forms,
                                      const HarmonicOptions& options = {}, int threads = 1);

}  // namespace conformal
