#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "conformal/mesh.h"

namespace conformal {

enum class MeshFormat { obj, ply };

// Format from the file extension (.obj / .ply).
MeshFormat format_from_path(const std::filesystem::path& path);

// Loads and validates a closed triangle mesh. Unreferenced vertices are
// dropped so ids are dense. Throws MeshError naming the offending cell.
Mesh load_mesh(const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path, MeshFormat format);
Mesh read_obj(std::istream& in);
Mesh read_ply(std::istream& in);

void write_obj(const Mesh& mesh, const std::filesystem::path& path);
void write_obj(const std::vector<Vec3>& positions, const std::vector<Triangle>& faces,
               const std::filesystem::path& path);

}  // namespace conformal
