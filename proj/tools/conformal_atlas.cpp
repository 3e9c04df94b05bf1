#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "conformal/cohomology.h"
#include "conformal/homology.h"
#include "conformal/mesh_io.h"
#include "conformal/param.h"
#include "conformal/period.h"
#include "conformal/pipeline.h"

using namespace conformal;
using nlohmann::json;

namespace {

struct Overrides {
  std::optional<double> tol;
  std::optional<std::string> solver, preprocess, workdir;
  std::optional<int> threads;
  std::string config_path, json_path, out_path;
};

PipelineConfig make_config(const Overrides& o) {
  PipelineConfig c = o.config_path.empty() ? PipelineConfig{} : PipelineConfig::load(o.config_path);
  if (const char* env = std::getenv("CONFORMAL_ATLAS_WORKDIR"); env && *env) c.workdir = env;
  if (o.tol) c.tol = *o.tol;
  if (o.solver) c.solver = parse_harmonic_solver(*o.solver);
  if (o.preprocess) c.preprocess = parse_preprocess_mode(*o.preprocess);
  if (o.workdir) c.workdir = *o.workdir;
  if (o.threads) c.threads = *o.threads;
  if (!o.json_path.empty()) c.json_path = o.json_path;
  if (!o.out_path.empty()) c.out_path = o.out_path;
  if (!(c.tol > 0.0)) throw Error("--tol must be positive");
  if (c.threads < 1) throw Error("--threads must be at least 1");
  return c;
}

Mesh read_mesh(const std::string& path) {
  if (!std::filesystem::exists(path)) throw Error("missing file " + path);
  return load_mesh(path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path);
}

// Prints the summary and writes the full document to --json when given.
void emit(const PipelineConfig& c, const json& summary, const json& full) {
  if (!c.json_path.empty()) write_json(c.json_path, full);
  std::cout << summary.dump(2) << '\n';
}

PipelineResult require_positive_genus(const Mesh& m, const PipelineConfig& c) {
  PipelineResult r = run_pipeline(m, c);
  if (r.stats.genus == 0) throw StageError("homology", "genus 0 surface has no holomorphic forms; use sphere-map");
  return r;
}

IntMatrix int_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw Error("matrix must be a non-empty array of rows");
  IntMatrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw Error("matrix rows differ in length");
    for (std::size_t k = 0; k < j[i].size(); ++k) m(i, k) = j[i][k].get<std::int64_t>();
  }
  return m;
}

Chain chain_from_json(const Mesh& m, const json& j) {
  // {"loop": [v0, v1, ...]} or [v0, v1, ...] or {"chain": [[edge, coeff], ...]}
  if (j.is_array()) return chain_from_loop(m, j.get<std::vector<int>>());
  if (j.contains("loop")) return chain_from_loop(m, j.at("loop").get<std::vector<int>>());
  if (j.contains("chain")) {
    Chain c;
    for (const json& t : j.at("chain")) {
      const int e = t.at(0).get<int>();
      if (e < 0 || e >= m.num_edges()) throw Error("edge " + std::to_string(e) + " out of range");
      c.add(e, t.at(1).get<std::int64_t>());
    }
    if (!boundary(m, c).empty()) throw Error("chain is not a cycle");
    return c;
  }
  throw Error("loop file needs a vertex list, \"loop\" or \"chain\"");
}

int fail(const std::string& message, const std::string& stage, int code) {
  json e = {{"error", message}};
  if (!stage.empty()) e["stage"] = stage;
  std::cerr << e.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal structure of triangulated surfaces"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Overrides o;
  app.add_option("--tol", o.tol, "harmonic residual tolerance");
  app.add_option("--solver", o.solver, "harmonic solver: direct or descent");
  app.add_option("--preprocess", o.preprocess, "negative weight preprocessing: swap, split or none");
  app.add_option("--threads", o.threads, "threads for per-form stages");
  app.add_option("--workdir", o.workdir, "cache directory (env CONFORMAL_ATLAS_WORKDIR)");
  app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--json", o.json_path, "write the full JSON result here");
  app.add_option("--out", o.out_path, "artifact output path");

  std::string mesh_path, second_path, loop_path, matrix_path;
  int form = -1, avoid = -1;

  auto* info = app.add_subcommand("info", "mesh statistics and genus");
  auto* sphere = app.add_subcommand("sphere-map", "conformal map of a genus 0 surface to the unit sphere");
  auto* basis = app.add_subcommand("basis", "canonical homology basis");
  auto* harmonic = app.add_subcommand("harmonic", "harmonic one-form basis");
  auto* holomorphic = app.add_subcommand("holomorphic", "holomorphic one-form basis");
  auto* period = app.add_subcommand("period", "period matrices");
  auto* flatten = app.add_subcommand("flatten", "global conformal parametrization");
  auto* curve = app.add_subcommand("curve-class", "homology class of a closed curve");
  auto* equiv = app.add_subcommand("verify-equivalence", "conformal equivalence of two surfaces");
  for (auto* sub : {info, sphere, basis, harmonic, holomorphic, period, flatten, curve, equiv}) {
    sub->add_option("mesh", mesh_path, "input mesh (OBJ or PLY)")->required();
  }
  flatten->add_option("--form", form, "holomorphic form index (default: first independent)");
  flatten->add_option("--avoid-vertex", avoid, "combine forms so that no zero lies next to this vertex");
  curve->add_option("--loop", loop_path, "JSON vertex loop or edge chain")->required();
  equiv->add_option("second", second_path, "second mesh")->required();
  equiv->add_option("--matrix", matrix_path, "JSON integer change of basis N (default identity)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(e.what(), "", 2);
  }

  try {
    const PipelineConfig config = make_config(o);
    const Mesh mesh = read_mesh(mesh_path);

    if (*info) {
      const EulerGenus eg = euler_genus(mesh);
      const EdgeWeights w = cotan_weights(mesh);
      int negative = 0;
      for (double k : w.values) negative += k < 0.0;
      std::cout << "V " << mesh.num_vertices() << "\nE " << mesh.num_edges() << "\nF " << mesh.num_faces()
                << "\nchi " << eg.chi << "\ng " << eg.genus << "\nnegative_weights " << negative << '\n';
      if (!config.json_path.empty()) {
        write_json(config.json_path, {{"vertices", mesh.num_vertices()}, {"edges", mesh.num_edges()},
                                      {"faces", mesh.num_faces()},       {"euler", eg.chi},
                                      {"genus", eg.genus},               {"negative_weights", negative}});
      }
    } else if (*sphere) {
      if (euler_genus(mesh).genus != 0) throw StageError("sphere_map", "surface has positive genus");
      PipelineResult r = run_pipeline(mesh, config);
      if (!config.out_path.empty()) write_obj(r.sphere->points, r.mesh.faces(), config.out_path);
      json full = r.to_json();
      json summary = full["sphere_map"];
      summary.erase("points");
      emit(config, summary, full);
    } else if (*basis) {
      const PreprocessResult pre = preprocess_negative_weights(mesh, config.preprocess);
      HomologyBasis hb = homology_basis(pre.mesh);
      json j = to_json(hb);
      j["pairing"] = to_json(pairing_matrix(pre.mesh, hb));
      emit(config, {{"genus", hb.genus()}, {"canonical", hb.canonical}, {"pairing", j["pairing"]}}, j);
    } else if (*harmonic) {
      PipelineResult r = require_positive_genus(mesh, config);
      json full = r.to_json();
      json summary = json::array();
      for (const json& h : full["harmonic"]) {
        summary.push_back({{"residual", h["residual"]}, {"energy", h["energy"]}, {"iterations", h["iterations"]}});
      }
      emit(config, summary, {{"mesh", full["mesh"]}, {"homology", full["homology"]}, {"harmonic", full["harmonic"]}});
    } else if (*holomorphic) {
      PipelineResult r = require_positive_genus(mesh, config);
      json full = r.to_json();
      emit(config,
           {{"independent", r.holo.independent}, {"star", to_json(r.holo.star)},
            {"wedge_agreement", r.holo.wedge_agreement}, {"star_square_defect", r.holo.star_square_defect}},
           {{"mesh", full["mesh"]}, {"homology", full["homology"]}, {"holomorphic", full["holomorphic"]},
            {"zeros", full["zeros"]}});
    } else if (*period) {
      PipelineResult r = require_positive_genus(mesh, config);
      json full = r.to_json();
      json p = full["period"];
      emit(config,
           {{"genus", r.stats.genus}, {"tau", p["tau"]}, {"S", p["S"]}, {"R", p["R"]},
            {"symmetry_defect", p["symmetry_defect"]}, {"r_square_defect", p["r_square_defect"]}},
           {{"mesh", full["mesh"]}, {"homology", full["homology"]}, {"period", p}, {"residuals", full["residuals"]}});
    } else if (*flatten) {
      PipelineResult r = require_positive_genus(mesh, config);
      const Mesh& m = r.mesh;
      HolomorphicForm zeta;
      json chosen;
      if (avoid >= 0) {
        if (avoid >= m.num_vertices()) throw Error("--avoid-vertex out of range");
        auto coeffs = form_avoiding_vertex(m, r.holo, avoid);
        zeta = combine_forms(r.holo, r.holo.independent, coeffs);
        for (auto c : coeffs) chosen.push_back({c.real(), c.imag()});
      } else {
        const int k = form >= 0 ? form : r.holo.independent.front();
        if (k >= static_cast<int>(r.holo.all.size())) throw Error("--form out of range");
        zeta = r.holo.all[k];
        chosen = k;
      }
      CutMesh domain;
      const HomologyBasis& sys = r.dual.sliced_system;
      if (r.stats.genus == 1 && sys.geometric()) {
        domain = slice_along_pair(m, sys.loops[0], sys.loops[1]).cut;
      } else {
        domain = fundamental_domain(m);
      }
      FlatParam fp = integrate_over_domain(m, domain, zeta);
      if (!config.out_path.empty()) {
        const bool svg = std::filesystem::path(config.out_path).extension() == ".svg";
        export_uv(m, fp, config.out_path, svg ? UvFormat::svg : UvFormat::obj);
      }
      auto [lo, hi] = uv_bounds(fp);
      json full = {{"form", chosen},
                   {"residual", fp.residual},
                   {"bounds", {{lo.x(), lo.y()}, {hi.x(), hi.y()}}},
                   {"zeros", to_json(fp.zeros)}};
      json uv = json::array();
      for (const Vec2& p : fp.uv) uv.push_back({p.x(), p.y()});
      json doc = full;
      doc["uv"] = uv;
      doc["origin"] = fp.domain.origin;
      emit(config, full, doc);
    } else if (*curve) {
      PipelineResult r = require_positive_genus(mesh, config);
      const Chain c = chain_from_json(r.mesh, read_json(loop_path));
      if (!boundary(r.mesh, c).empty()) throw Error("loop is not closed");
      CurveClass cc = curve_class(r.dual.forms, c);
      json j = {{"class", cc.rounded}, {"values", cc.values}, {"max_deviation", cc.max_deviation}};
      emit(config, j, j);
    } else if (*equiv) {
      PipelineResult a = require_positive_genus(mesh, config);
      PipelineResult b = require_positive_genus(read_mesh(second_path), config);
      if (a.stats.genus != b.stats.genus) throw Error("genus differs");
      IntMatrix n = matrix_path.empty() ? IntMatrix::Identity(2 * a.stats.genus, 2 * a.stats.genus)
                                        : int_matrix(read_json(matrix_path));
      EquivalenceCheck ec = verify_equivalence(a.periods, b.periods, n);
      json j = {{"equivalent", ec.equivalent},       {"r_residual", ec.r_residual},
                {"c_residual", ec.c_residual},       {"determinant", ec.determinant},
                {"symplectic", ec.symplectic},       {"symplectic_checked", ec.symplectic_checked}};
      emit(config, j, j);
    }
  } catch (const StageError& e) {
    return fail(e.what(), e.stage(), 1);
  } catch (const std::exception& e) {
    return fail(e.what(), "", 1);
  }
  return 0;
}
