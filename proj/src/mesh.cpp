#include "acudesk/mesh.hpp"

#include "acudesk/digest.hpp"
#include "acudesk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace acudesk {
namespace {

[[noreturn]] void obj_fail(int line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

/// Resolves a 1-based or negative (relative) OBJ index to 0-based.
long resolve(long idx, std::size_t count, int line) {
    long r = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
    if (idx == 0 || r < 0 || r >= static_cast<long>(count))
        obj_fail(line, "index " + std::to_string(idx) + " out of range (" + std::to_string(count) + " available)");
    return r;
}

} // namespace

void Mesh::validate() const {
    for (const auto& t : triangles) {
        for (auto i : t) {
            if (i >= vertices.size()) throw Error(ErrorCode::ParseError, "triangle index out of range");
        }
    }
    if (!normals.empty()) {
        if (normals.size() != vertices.size())
            throw Error(ErrorCode::ParseError, "normal count must match vertex count");
        for (const auto& n : normals) {
            if (std::abs(n.norm() - 1.0) > 1e-4) throw Error(ErrorCode::ParseError, "normals must be unit length");
        }
    }
}

Mesh parse_obj(const std::string& text) {
    Mesh mesh;
    std::vector<Vec3> file_normals;
    std::vector<long> normal_of_vertex;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        ls.imbue(std::locale::classic());
        std::string kind;
        if (!(ls >> kind) || kind[0] == '#') continue;
        if (kind == "v" || kind == "vn") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) obj_fail(lineno, "expected three coordinates");
            if (kind == "v") {
                mesh.vertices.emplace_back(x, y, z);
                normal_of_vertex.push_back(-1);
            } else {
                Vec3 n(x, y, z);
                if (n.norm() == 0.0) obj_fail(lineno, "zero-length normal");
                file_normals.push_back(n.normalized());
            }
        } else if (kind == "f") {
            std::vector<std::uint32_t> corners;
            for (std::string tok; ls >> tok;) {
                // v, v/vt, v//vn, v/vt/vn
                long vi = 0;
                long ni = 0;
                const auto s1 = tok.find('/');
                try {
                    vi = std::stol(tok.substr(0, s1));
                    if (s1 != std::string::npos) {
                        const auto s2 = tok.find('/', s1 + 1);
                        if (s2 != std::string::npos && s2 + 1 < tok.size()) ni = std::stol(tok.substr(s2 + 1));
                    }
                } catch (const std::exception&) {
                    obj_fail(lineno, "malformed face token '" + tok + "'");
                }
                const long v = resolve(vi, mesh.vertices.size(), lineno);
                if (ni != 0) normal_of_vertex[v] = resolve(ni, file_normals.size(), lineno);
                corners.push_back(static_cast<std::uint32_t>(v));
            }
            if (corners.size() < 3) obj_fail(lineno, "face needs at least three vertices");
            for (std::size_t k = 1; k + 1 < corners.size(); ++k)
                mesh.triangles.push_back({corners[0], corners[k], corners[k + 1]});
        }
        // vt, o, g, s, usemtl, mtllib: ignored
    }
    if (mesh.triangles.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no faces");

    const bool all_normals = !normal_of_vertex.empty() &&
        std::all_of(normal_of_vertex.begin(), normal_of_vertex.end(), [](long n) { return n >= 0; });
    if (all_normals) {
        mesh.normals.reserve(mesh.vertices.size());
        for (long n : normal_of_vertex) mesh.normals.push_back(file_normals[static_cast<std::size_t>(n)]);
    }
    return mesh;
}

Mesh load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_obj(ss.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void write_obj(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << buf;
    }
    for (const auto& n : mesh.normals) {
        std::snprintf(buf, sizeof buf, "vn %.17g %.17g %.17g\n", n.x(), n.y(), n.z());
        out << buf;
    }
    const bool with_normals = !mesh.normals.empty();
    for (const auto& t : mesh.triangles) {
        out << 'f';
        for (auto i : t) {
            out << ' ' << i + 1;
            if (with_normals) out << "//" << i + 1;
        }
        out << '\n';
    }
}

std::string mesh_digest(const Mesh& mesh) {
    std::string bytes;
    auto put = [&](const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); };
    for (const auto& v : mesh.vertices) put(v.data(), sizeof(double) * 3);
    for (const auto& n : mesh.normals) put(n.data(), sizeof(double) * 3);
    for (const auto& t : mesh.triangles) put(t.data(), sizeof(std::uint32_t) * 3);
    return sha256_hex(bytes);
}

} // namespace acudesk
