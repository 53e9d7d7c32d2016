// interior.hpp — axis-aligned lattice fill of a closed surface mesh.
//
// Interior points give hollow surface meshes volumetric support so they do
// not collapse like empty shells. Nodes of a lattice with the given pitch,
// anchored at the bounding-box minimum corner, are kept when strictly inside
// the surface; they are appended after the surface vertices, mobile, with
// zero external force.
#pragma once

#include "deform/collision.hpp"
#include "deform/core.hpp"
#include "deform/mesh.hpp"

#include <vector>

namespace deform {

struct InteriorResult {
    ObjectModel model;
    // True when the spacing exceeded the bounding box and no lattice interior
    // was possible; the model is returned unchanged in that case.
    bool spacing_too_coarse = false;
};

inline InteriorResult generate_interior_points(const ObjectModel& model, double spacing) {
    if (!(spacing > 0.0)) throw ValidationError("interior spacing must be positive");
    if (!watertight(model))
        throw GeometryError("generate_interior_points: surface is not watertight; "
                            "the inside test is undefined");

    const Aabb box = bounding_box(model.rest_positions.begin(),
                                  model.rest_positions.begin() +
                                      static_cast<std::ptrdiff_t>(model.surface_vertex_count));
    if (spacing > box.extent().maxCoeff()) return {model, true};

    InteriorResult res{model, false};
    ObjectModel& out = res.model;
    const std::span<const Vec3> pos(model.rest_positions.data(), model.surface_vertex_count);
    const std::span<const Triangle> tris(model.triangles);
    const Vec3 ext = box.extent();
    const int ni = static_cast<int>(ext.x() / spacing);
    const int nj = static_cast<int>(ext.y() / spacing);
    const int nk = static_cast<int>(ext.z() / spacing);
    for (int i = 0; i <= ni; ++i)
        for (int j = 0; j <= nj; ++j)
            for (int k = 0; k <= nk; ++k) {
                const Vec3 p = box.lo + spacing * Vec3(i, j, k);
                if (!point_in_mesh(p, pos, tris)) continue;
                out.rest_positions.push_back(p);
                out.mobility.push_back(1);
                out.external_force.push_back(Vec3::Zero());
            }
    return res;
}

}  // namespace deform
