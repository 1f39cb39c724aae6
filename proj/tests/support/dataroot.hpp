#pragma once

// Throwaway service data root: one sphere volume and a three-layer cube model.

#include "acudesk/mesh.hpp"
#include "acudesk/nrrd.hpp"
#include "acudesk/phantom.hpp"

#include "oracles.hpp"

#include <filesystem>
#include <fstream>

namespace dataroot {

using namespace acudesk;

/// Volume "sphere" (24^3, 1 mm, radius 8 around the volume centre) and model
/// "cube" with skin/muscle/bone boxes nested around the same centre, plus
/// acupoint "P1" 4 mm above it inside muscle.
inline std::filesystem::path make(const std::string& tag) {
    const auto root = oracle::temp_dir(tag);
    std::filesystem::create_directories(root / "volumes");
    std::filesystem::create_directories(root / "models" / "cube");
    const Volume v = sphere_distance_phantom(24, 1.0, 8.0);
    write_nrrd(v, root / "volumes" / "sphere.nrrd");

    const Vec3 c = v.center();
    const auto dir = root / "models" / "cube";
    write_obj(box_mesh(c - Vec3::Constant(10), c + Vec3::Constant(10)), dir / "skin.obj");
    write_obj(box_mesh(c - Vec3::Constant(7), c + Vec3::Constant(7)), dir / "muscle.obj");
    write_obj(box_mesh(c - Vec3::Constant(2), c + Vec3::Constant(2)), dir / "bone.obj");
    auto vec = [](const Vec3& p) {
        return "[" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ", " + std::to_string(p.z()) + "]";
    };
    std::ofstream(dir / "acupoints.json") << R"([{"name": "P1", "position": )" << vec(c + Vec3(0, 0, 4))
                                          << R"(, "tolerance_radius": 3, "target_layer": "muscle", "max_safe_depth": 9}])";
    std::ofstream(dir / "model.json")
        << R"({"name": "cube", "layers": [
              {"name": "skin", "mesh_path": "skin.obj", "color": [0.9, 0.7, 0.6]},
              {"name": "muscle", "mesh_path": "muscle.obj", "color": [0.8, 0.2, 0.2]},
              {"name": "bone", "mesh_path": "bone.obj", "color": [1, 1, 0.9], "avoid": true}],
            "acupoints_path": "acupoints.json"})";
    return root;
}

} // namespace dataroot
