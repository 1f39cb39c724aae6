#!/usr/bin/env python3
"""Writes the sample layered model under data/models/head.

Three nested UV spheres (skin, muscle, bone) centred on the origin, a
landmark set on the skin and a handful of acupoints. The geometry matches
the shells phantom written by `acudesk phantom --kind shells`, so a landmark
registration lines the two up.
"""

import json
import math
import pathlib
import sys


def uv_sphere(radius, stacks=24, slices=48):
    verts = [(0.0, 0.0, radius)]
    for i in range(1, stacks):
        theta = math.pi * i / stacks
        for j in range(slices):
            phi = 2 * math.pi * j / slices
            verts.append((radius * math.sin(theta) * math.cos(phi),
                          radius * math.sin(theta) * math.sin(phi),
                          radius * math.cos(theta)))
    verts.append((0.0, 0.0, -radius))
    bottom = len(verts)  # 1-based index of the south pole
    faces = []
    for j in range(slices):
        faces.append((1, 2 + j, 2 + (j + 1) % slices))
    for i in range(stacks - 2):
        row, nxt = 2 + i * slices, 2 + (i + 1) * slices
        for j in range(slices):
            a, b = row + j, row + (j + 1) % slices
            c, d = nxt + j, nxt + (j + 1) % slices
            faces.append((a, c, d))
            faces.append((a, d, b))
    last = 2 + (stacks - 2) * slices
    for j in range(slices):
        faces.append((last + j, bottom, last + (j + 1) % slices))
    return verts, faces


def write_obj(path, radius):
    verts, faces = uv_sphere(radius)
    with open(path, "w") as f:
        f.write(f"# sphere r={radius} mm\n")
        for v in verts:
            f.write("v {:.6f} {:.6f} {:.6f}\n".format(*v))
        for a, b, c in faces:
            f.write(f"f {a} {b} {c}\n")


def main(out):
    out.mkdir(parents=True, exist_ok=True)
    # Radii follow the phantom's shell fractions of a 63 mm half-extent.
    skin, muscle, bone = 0.90 * 63, 0.72 * 63, 0.35 * 63
    write_obj(out / "skin.obj", skin)
    write_obj(out / "muscle.obj", muscle)
    write_obj(out / "bone.obj", bone)
    model = {
        "name": "head",
        "layers": [
            {"name": "skin", "mesh_path": "skin.obj", "color": [0.93, 0.76, 0.65]},
            {"name": "muscle", "mesh_path": "muscle.obj", "color": [0.75, 0.25, 0.22]},
            {"name": "bone", "mesh_path": "bone.obj", "color": [0.95, 0.93, 0.85], "avoid": True},
        ],
        "landmarks": {
            "left": [-skin, 0, 0], "right": [skin, 0, 0],
            "bottom": [0, -skin, 0], "top": [0, skin, 0],
            "back": [0, 0, -skin], "front": [0, 0, skin],
        },
        "acupoints_path": "acupoints.json",
    }
    s = skin / math.sqrt(2)
    acupoints = [
        {"name": "GV20", "position": [0, 0, skin - 8], "target_layer": "muscle", "max_safe_depth": 20},
        {"name": "LI4", "position": [s - 6, s - 6, 0], "tolerance_radius": 4, "target_layer": "muscle",
         "max_safe_depth": 25},
        {"name": "ST36", "position": [0, -(skin - 10), 0], "target_layer": "muscle", "max_safe_depth": 25},
    ]
    (out / "model.json").write_text(json.dumps(model, indent=2) + "\n")
    (out / "acupoints.json").write_text(json.dumps(acupoints, indent=2) + "\n")


if __name__ == "__main__":
    main(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/models/head"))
