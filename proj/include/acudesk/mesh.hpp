#pragma once

#include "acudesk/math.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace acudesk {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals; // empty or one per vertex
    std::vector<std::array<std::uint32_t, 3>> triangles;

    /// Throws ParseError on out-of-range indices or non-unit normals.
    void validate() const;
};

/// Wavefront OBJ subset: v / vn / f records. Polygons are fan-triangulated,
/// negative (relative) indices are honoured, everything else is ignored.
Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_obj(const std::string& text);

void write_obj(const Mesh& mesh, const std::filesystem::path& path);

/// Hex SHA-256 over the binary geometry; stable for identical meshes.
std::string mesh_digest(const Mesh& mesh);

} // namespace acudesk
