#include "conformal/mesh_io.h"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace conformal {

namespace {

Mesh compact_and_build(std::vector<Vec3> positions, std::vector<Triangle> faces) {
  std::vector<int> remap(positions.size(), -1);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (int v : faces[f]) {
      if (v < 0 || v >= static_cast<int>(positions.size())) {
        throw MeshError("face " + std::to_string(f) + " references missing vertex " +
                        std::to_string(v));
      }
      remap[v] = 0;
    }
  }
  std::vector<Vec3> kept;
  for (std::size_t v = 0; v < positions.size(); ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(kept.size());
      kept.push_back(positions[v]);
    }
  }
  for (auto& t : faces) {
    for (int& v : t) v = remap[v];
  }
  return Mesh::build(std::move(kept), std::move(faces));
}

int parse_obj_index(const std::string& token, int vertex_count, int line_no) {
  std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoi(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw MeshError("parse failure at line " + std::to_string(line_no) + ": bad index '" +
                    token + "'");
  }
  if (idx < 0) return vertex_count + idx;
  if (idx == 0) throw MeshError("parse failure at line " + std::to_string(line_no) + ": index 0");
  return idx - 1;
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".obj") return MeshFormat::obj;
  if (ext == ".ply") return MeshFormat::ply;
  throw MeshError("unsupported mesh format '" + ext + "' (expected .obj or .ply)");
}

Mesh load_mesh(const std::filesystem::path& path) { return load_mesh(path, format_from_path(path)); }

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  return format == MeshFormat::obj ? read_obj(in) : read_ply(in);
}

Mesh read_obj(std::istream& in) {
  std::vector<Vec3> positions;
  std::vector<Triangle> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw MeshError("parse failure at line " + std::to_string(line_no) + ": bad vertex");
      }
      positions.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) idx.push_back(parse_obj_index(tok, static_cast<int>(positions.size()), line_no));
      if (idx.size() != 3) {
        throw MeshError("non-triangular face " + std::to_string(faces.size()) + " at line " +
                        std::to_string(line_no) + " (" + std::to_string(idx.size()) + " vertices)");
      }
      faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  if (faces.empty()) throw MeshError("parse failure: no faces");
  return compact_and_build(std::move(positions), std::move(faces));
}

namespace {

enum class PlyEncoding { ascii, binary_le, binary_be };

struct PlyProperty {
  std::string name;
  std::string type;        // scalar type, or list item type
  std::string count_type;  // non-empty for lists
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> props;
};

std::size_t ply_type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw MeshError("parse failure: unknown PLY type '" + t + "'");
}

double read_binary_scalar(std::istream& in, const std::string& t, bool big_endian) {
  std::size_t n = ply_type_size(t);
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n))) {
    throw MeshError("parse failure: truncated binary PLY");
  }
  if (big_endian) std::reverse(buf, buf + n);
  if (t == "char" || t == "int8") return static_cast<std::int8_t>(buf[0]);
  if (t == "uchar" || t == "uint8") return buf[0];
  if (t == "short" || t == "int16") { std::int16_t v; std::memcpy(&v, buf, 2); return v; }
  if (t == "ushort" || t == "uint16") { std::uint16_t v; std::memcpy(&v, buf, 2); return v; }
  if (t == "int" || t == "int32") { std::int32_t v; std::memcpy(&v, buf, 4); return v; }
  if (t == "uint" || t == "uint32") { std::uint32_t v; std::memcpy(&v, buf, 4); return v; }
  if (t == "float" || t == "float32") { float v; std::memcpy(&v, buf, 4); return v; }
  double v;
  std::memcpy(&v, buf, 8);
  return v;
}

}  // namespace

Mesh read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw MeshError("parse failure: missing 'ply' magic");
  }
  PlyEncoding encoding = PlyEncoding::ascii;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") encoding = PlyEncoding::ascii;
      else if (fmt == "binary_little_endian") encoding = PlyEncoding::binary_le;
      else if (fmt == "binary_big_endian") encoding = PlyEncoding::binary_be;
      else throw MeshError("parse failure: unknown PLY format '" + fmt + "'");
    } else if (tag == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) throw MeshError("parse failure: property before element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        ls >> p.count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ls >> p.name;
      }
      elements.back().props.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }

  std::vector<Vec3> positions;
  std::vector<Triangle> faces;
  const bool binary = encoding != PlyEncoding::ascii;
  const bool big = encoding == PlyEncoding::binary_be;
  auto scalar = [&](const std::string& type) -> double {
    if (binary) return read_binary_scalar(in, type, big);
    double v;
    if (!(in >> v)) throw MeshError("parse failure: truncated ascii PLY");
    return v;
  };

  for (const PlyElement& el : elements) {
    for (long i = 0; i < el.count; ++i) {
      Vec3 p = Vec3::Zero();
      std::vector<int> idx;
      for (const PlyProperty& prop : el.props) {
        if (!prop.count_type.empty()) {
          long n = static_cast<long>(scalar(prop.count_type));
          std::vector<int> items;
          for (long k = 0; k < n; ++k) items.push_back(static_cast<int>(scalar(prop.type)));
          if (prop.name == "vertex_indices" || prop.name == "vertex_index") idx = items;
        } else {
          double v = scalar(prop.type);
          if (prop.name == "x") p.x() = v;
          else if (prop.name == "y") p.y() = v;
          else if (prop.name == "z") p.z() = v;
        }
      }
      if (el.name == "vertex") {
        positions.push_back(p);
      } else if (el.name == "face") {
        if (idx.size() != 3) {
          throw MeshError("non-triangular face " + std::to_string(faces.size()) + " (" +
                          std::to_string(idx.size()) + " vertices)");
        }
        faces.push_back({idx[0], idx[1], idx[2]});
      }
    }
  }
  if (faces.empty()) throw MeshError("parse failure: no faces");
  return compact_and_build(std::move(positions), std::move(faces));
}

void write_obj(const std::vector<Vec3>& positions, const std::vector<Triangle>& faces,
               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (const Vec3& p : positions) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const Triangle& t : faces) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

void write_obj(const Mesh& mesh, const std::filesystem::path& path) {
  write_obj(mesh.positions(), mesh.faces(), path);
}

}  // namespace conformal
