#include "conformal/pipeline.h"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace conformal {

using nlohmann::json;

namespace {

class Fnv {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  template <class T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class Fn>
auto stage(const char* name, PipelineResult& r, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      r.timings[name] += seconds_since(t0);
    } else {
      auto out = fn();
      r.timings[name] += seconds_since(t0);
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

const char kMagic[8] = {'C', 'A', 'C', 'A', 'C', 'H', 'E', '1'};

struct CachedForms {
  std::vector<int> iterations;
  std::vector<char> converged;
  std::vector<std::vector<double>> values;
};

std::filesystem::path cache_file(const PipelineConfig& c, std::uint64_t key, const char* what) {
  return std::filesystem::path(c.workdir) / (hex_key(key) + "." + what + ".bin");
}

void write_cache(const std::filesystem::path& path, const CachedForms& cf) {
  std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write cache " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t count = cf.values.size();
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (std::size_t k = 0; k < cf.values.size(); ++k) {
      const std::int64_t it = cf.iterations[k], conv = cf.converged[k], n = cf.values[k].size();
      out.write(reinterpret_cast<const char*>(&it), sizeof it);
      out.write(reinterpret_cast<const char*>(&conv), sizeof conv);
      out.write(reinterpret_cast<const char*>(&n), sizeof n);
      out.write(reinterpret_cast<const char*>(cf.values[k].data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!out) throw Error("cache write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<CachedForms> read_cache(const std::filesystem::path& path, std::size_t count, std::size_t length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t stored = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&stored), sizeof stored);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0 || stored != count) return std::nullopt;
  CachedForms cf;
  for (std::size_t k = 0; k < count; ++k) {
    std::int64_t it = 0, conv = 0, n = 0;
    in.read(reinterpret_cast<char*>(&it), sizeof it);
    in.read(reinterpret_cast<char*>(&conv), sizeof conv);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || static_cast<std::size_t>(n) != length) return std::nullopt;
    std::vector<double> v(length);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(length * sizeof(double)));
    if (!in) return std::nullopt;
    cf.iterations.push_back(static_cast<int>(it));
    cf.converged.push_back(static_cast<char>(conv));
    cf.values.push_back(std::move(v));
  }
  return cf;
}

json vec3_list(const std::vector<Vec3>& pts) {
  json a = json::array();
  for (const Vec3& p : pts) a.push_back({p.x(), p.y(), p.z()});
  return a;
}

}  // namespace

json PipelineConfig::result_key() const {
  return {{"tol", tol},
          {"solver", to_string(solver)},
          {"preprocess", to_string(preprocess)},
          {"sphere_epsilon", sphere_epsilon}};
}

json PipelineConfig::to_json() const {
  json j = result_key();
  j["threads"] = threads;
  j["workdir"] = workdir;
  j["json"] = json_path;
  j["out"] = out_path;
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  PipelineConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const json& v = it.value();
    try {
      if (k == "tol") c.tol = v.get<double>();
      else if (k == "solver") c.solver = parse_harmonic_solver(v.get<std::string>());
      else if (k == "preprocess") c.preprocess = parse_preprocess_mode(v.get<std::string>());
      else if (k == "sphere_epsilon") c.sphere_epsilon = v.get<double>();
      else if (k == "threads") c.threads = v.get<int>();
      else if (k == "workdir") c.workdir = v.get<std::string>();
      else if (k == "json") c.json_path = v.get<std::string>();
      else if (k == "out") c.out_path = v.get<std::string>();
      else throw Error("unknown config key '" + k + "'");
    } catch (const json::exception& e) {
      throw Error("config key '" + k + "': " + e.what());
    }
  }
  if (!(c.tol > 0.0)) throw Error("config: tol must be positive");
  if (!(c.sphere_epsilon > 0.0)) throw Error("config: sphere_epsilon must be positive");
  if (c.threads < 1) throw Error("config: threads must be at least 1");
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
  return from_json(j);
}

std::uint64_t content_hash(const Mesh& mesh, const PipelineConfig& config) {
  Fnv h;
  h.value(mesh.num_vertices());
  h.value(mesh.num_faces());
  for (const Vec3& p : mesh.positions()) h.bytes(p.data(), 3 * sizeof(double));
  for (const Triangle& t : mesh.faces()) h.bytes(t.data(), 3 * sizeof(int));
  if (mesh.has_intrinsic_corners()) {
    for (const auto& c : mesh.corner_positions()) {
      for (const Vec3& p : c) h.bytes(p.data(), 3 * sizeof(double));
    }
  }
  const std::string cfg = config.result_key().dump();
  h.bytes(cfg.data(), cfg.size());
  return h.digest();
}

std::string hex_key(std::uint64_t key) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << key;
  return s.str();
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

json to_json(const IntMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const HomologyBasis& basis) {
  json cycles = json::array();
  for (const Chain& c : basis.cycles) {
    json edges = json::array();
    for (auto [e, k] : c.coeffs) edges.push_back({e, k});
    cycles.push_back(edges);
  }
  return {{"genus", basis.genus()},
          {"canonical", basis.canonical},
          {"cycles", cycles},
          {"loops", basis.loops},
          {"transform", to_json(basis.transform)}};
}

json to_json(const PeriodData& p) {
  return {{"C", to_json(p.C)},
          {"c_sign", p.c_sign},
          {"S", to_json(p.S)},
          {"R", to_json(p.R)},
          {"P", to_json(p.P)},
          {"periods", to_json(p.full)},
          {"tau", to_json(p.tau)},
          {"independent", p.independent},
          {"symmetry_defect", p.symmetry_defect},
          {"min_eigenvalue", p.min_eigenvalue},
          {"r_square_defect", p.r_square_defect},
          {"cr_defect", p.cr_defect}};
}

json to_json(const ZeroReport& z) {
  json zeros = json::array();
  for (const Zero& x : z.zeros) zeros.push_back({{"vertex", x.vertex}, {"index", x.index}});
  return {{"zeros", zeros},
          {"total_index", z.total_index},
          {"near_singular_faces", z.near_singular_faces},
          {"generic", z.generic}};
}

json PipelineResult::to_json() const {
  json j;
  j["mesh"] = {{"vertices", stats.vertices}, {"edges", stats.edges},   {"faces", stats.faces},
               {"euler", stats.euler},       {"genus", stats.genus},   {"swaps", stats.swaps},
               {"splits", stats.splits},     {"residual_negative", stats.residual_negative},
               {"min_weight", stats.min_weight}};
  j["key"] = hex_key(key);
  j["residuals"] = residuals;
  if (sphere) {
    j["sphere_map"] = {{"energy", sphere->energy()},
                       {"iterations", sphere->iterations},
                       {"converged", sphere->converged},
                       {"degree", sphere_degree},
                       {"centroid_norm", sphere->centroid_norm},
                       {"tangential_residual", sphere->tangential_residual},
                       {"points", vec3_list(sphere->points)}};
    return j;
  }
  j["homology"] = conformal::to_json(basis);
  j["dual"] = {{"pairing", conformal::to_json(dual.pairing)},
               {"residual", dual.residual},
               {"closedness", dual.closedness},
               {"flipped_faces", dual.flipped_faces}};
  json harm = json::array();
  for (const HarmonicForm& h : harmonic) {
    harm.push_back({{"residual", h.residual},
                    {"energy", h.energy},
                    {"iterations", h.iterations},
                    {"converged", h.converged},
                    {"values", h.form.values}});
  }
  j["harmonic"] = harm;
  json holo_forms = json::array();
  for (const HolomorphicForm& z : holo.all) {
    holo_forms.push_back({{"alpha", std::vector<double>(z.alpha.data(), z.alpha.data() + z.alpha.size())},
                          {"imag", z.imag.values}});
  }
  j["holomorphic"] = {{"forms", holo_forms},
                      {"independent", holo.independent},
                      {"star", conformal::to_json(holo.star)},
                      {"wedge_agreement", holo.wedge_agreement},
                      {"star_square_defect", holo.star_square_defect}};
  j["period"] = conformal::to_json(periods);
  json zs = json::array();
  for (const ZeroReport& z : zeros) zs.push_back(conformal::to_json(z));
  j["zeros"] = zs;
  return j;
}

PipelineResult run_pipeline(const Mesh& input, const PipelineConfig& config) {
  PipelineResult r;
  stage("mesh", r, [&] {
    PreprocessResult pre = preprocess_negative_weights(input, config.preprocess);
    r.mesh = std::move(pre.mesh);
    const EulerGenus eg = euler_genus(r.mesh);
    r.stats = {r.mesh.num_vertices(), r.mesh.num_edges(), r.mesh.num_faces(), eg.chi, eg.genus,
               pre.report.swaps, pre.report.splits, static_cast<int>(pre.report.residual_negative.size()),
               cotan_weights(r.mesh).min()};
  });
  const Mesh& m = r.mesh;
  r.key = content_hash(m, config);
  const bool caching = !config.workdir.empty();

  if (r.stats.genus == 0) {
    stage("sphere_map", r, [&] {
      SphereFlowOptions opts;
      opts.epsilon = config.sphere_epsilon;
      const auto path = cache_file(config, r.key, "sphere");
      const std::size_t length = 5 + 3 * static_cast<std::size_t>(m.num_vertices());
      SphereMap s;
      std::optional<CachedForms> cached;
      if (caching) cached = read_cache(path, 1, length);
      if (cached) {
        // header: energy, step, centroid norm, tangential residual, converged
        const std::vector<double>& v = cached->values[0];
        s.energy_trace = {v[0]};
        s.step = v[1];
        s.centroid_norm = v[2];
        s.tangential_residual = v[3];
        s.converged = v[4] != 0.0;
        s.iterations = cached->iterations[0];
        s.points.resize(m.num_vertices());
        for (int i = 0; i < m.num_vertices(); ++i) s.points[i] = Vec3(v[5 + 3 * i], v[6 + 3 * i], v[7 + 3 * i]);
        r.from_cache = true;
      } else {
        s = conformal_embed(m, opts);
        if (caching) {
          std::vector<double> v = {s.energy(), s.step, s.centroid_norm, s.tangential_residual, s.converged ? 1.0 : 0.0};
          for (const Vec3& p : s.points) v.insert(v.end(), {p.x(), p.y(), p.z()});
          write_cache(path, {{s.iterations}, {static_cast<char>(s.converged)}, {std::move(v)}});
        }
      }
      r.sphere_degree = map_degree(m, s.points);
      if (r.sphere_degree != 1) throw Error("map degree " + std::to_string(r.sphere_degree));
      r.residuals["sphere_tangential"] = s.tangential_residual;
      r.residuals["sphere_centroid"] = s.centroid_norm;
      r.sphere = std::move(s);
    });
    return r;
  }

  stage("homology", r, [&] { r.basis = homology_basis(m); });
  stage("cohomology", r, [&] {
    r.dual = dual_basis(m, r.basis, config.threads);
    r.basis = r.dual.basis;
    r.residuals["dual_pairing"] =
        (r.dual.pairing - Eigen::MatrixXd::Identity(r.dual.pairing.rows(), r.dual.pairing.cols())).lpNorm<Eigen::Infinity>();
    r.residuals["dual_closedness"] = r.dual.closedness;
  });
  stage("harmonic", r, [&] {
    const EdgeWeights w = cotan_weights(m);
    HarmonicOptions opts;
    opts.solver = config.solver;
    opts.tol = config.tol;
    const std::size_t count = r.dual.forms.size();
    const auto path = cache_file(config, r.key, "harmonic");
    std::optional<CachedForms> cached;
    if (caching) cached = read_cache(path, count, static_cast<std::size_t>(m.num_edges()));
    if (cached) {
      r.from_cache = true;
      r.harmonic.resize(count);
      for (std::size_t k = 0; k < count; ++k) {
        HarmonicForm& h = r.harmonic[k];
        h.form.values = std::move(cached->values[k]);
        h.iterations = cached->iterations[k];
        h.converged = cached->converged[k] != 0;
        h.class_index = static_cast<int>(k);
      }
    } else {
      r.harmonic = diffuse_all(m, w, r.dual.forms, opts, config.threads);
      if (caching) {
        CachedForms cf;
        for (const HarmonicForm& h : r.harmonic) {
          cf.iterations.push_back(h.iterations);
          cf.converged.push_back(h.converged ? 1 : 0);
          cf.values.push_back(h.form.values);
        }
        write_cache(path, cf);
      }
    }
    double worst = 0.0;
    for (HarmonicForm& h : r.harmonic) {
      h.residual = harmonic_residual(m, w, h.form);
      h.energy = string_energy_1(m, w, h.form);
      h.potential.clear();
      h.energy_trace.clear();
      worst = std::max(worst, h.residual);
    }
    r.residuals["harmonic"] = worst;
    if (worst > config.tol) throw Error("harmonic residual " + std::to_string(worst) + " above tol");
  });
  stage("hodge", r, [&] {
    std::vector<OneForm> forms;
    for (const HarmonicForm& h : r.harmonic) forms.push_back(h.form);
    r.holo = holomorphic_forms(m, r.basis, forms);
    r.residuals["wedge_agreement"] = r.holo.wedge_agreement;
    r.residuals["star_square"] = r.holo.star_square_defect;
  });
  stage("period", r, [&] {
    r.periods = compute_periods(m, r.basis, r.holo);
    r.residuals["s_symmetry"] = r.periods.symmetry_defect;
    r.residuals["r_square"] = r.periods.r_square_defect;
    if (r.periods.symmetry_defect > 1e-6) {
      throw Error("S is not symmetric (defect " + std::to_string(r.periods.symmetry_defect) + ")");
    }
    if (!(r.periods.min_eigenvalue > 0.0)) {
      throw Error("S is not positive definite (min eigenvalue " + std::to_string(r.periods.min_eigenvalue) + ")");
    }
  });
  stage("param", r, [&] {
    for (int k : r.holo.independent) r.zeros.push_back(detect_zeros(m, r.holo.all[k]));
  });
  return r;
}

}  // namespace conformal
