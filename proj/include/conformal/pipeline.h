#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "conformal/cohomology.h"
#include "conformal/harmonic.h"
#include "conformal/hodge.h"
#include "conformal/homology.h"
#include "conformal/mesh.h"
#include "conformal/param.h"
#include "conformal/period.h"
#include "conformal/sphere_map.h"

namespace conformal {

// Failure inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  double tol = 1e-8;  // harmonic residual
  HarmonicSolver solver = HarmonicSolver::direct;
  PreprocessMode preprocess = PreprocessMode::swap;
  double sphere_epsilon = 1e-7;
  int threads = 1;
  std::string workdir;  // cache directory; empty disables caching
  std::string json_path;
  std::string out_path;

  // Fields that influence results; threads and paths are excluded.
  nlohmann::json result_key() const;
  nlohmann::json to_json() const;
  // Unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::string& path);
};

struct MeshStats {
  int vertices = 0, edges = 0, faces = 0;
  int euler = 0, genus = 0;
  int swaps = 0, splits = 0;
  int residual_negative = 0;
  double min_weight = 0.0;
};

struct PipelineResult {
  MeshStats stats;
  Mesh mesh;  // after preprocessing
  std::optional<SphereMap> sphere;
  int sphere_degree = 0;
  HomologyBasis basis;
  DualBasis dual;
  std::vector<HarmonicForm> harmonic;
  HolomorphicBasis holo;
  PeriodData periods;
  std::vector<ZeroReport> zeros;  // one per independent holomorphic form
  std::map<std::string, double> residuals;
  std::map<std::string, double> timings;  // seconds, per stage
  bool from_cache = false;
  std::uint64_t key = 0;

  // Deterministic; timings and cache state are left out.
  nlohmann::json to_json() const;
};

// 64-bit FNV-1a of the mesh (connectivity, positions, intrinsic corners) and
// the result-relevant part of the config.
std::uint64_t content_hash(const Mesh& mesh, const PipelineConfig& config);
std::string hex_key(std::uint64_t key);

PipelineResult run_pipeline(const Mesh& mesh, const PipelineConfig& config = {});

nlohmann::json to_json(const HomologyBasis& basis);
nlohmann::json to_json(const PeriodData& p);
nlohmann::json to_json(const Eigen::MatrixXd& m);
nlohmann::json to_json(const Eigen::MatrixXcd& m);
nlohmann::json to_json(const IntMatrix& m);
nlohmann::json to_json(const ZeroReport& z);

}  // namespace conformal
