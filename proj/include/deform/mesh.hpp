// mesh.hpp — triangle-mesh object model and connectivity construction.
//
// An ObjectModel is one object's rest geometry: surface vertices followed by
// optional interior points, triangles over the surface subset only, and the
// per-vertex/per-object attributes the relaxation needs (mobility, external
// force, stiffness k, Poisson parameter h). Undirected internal edges connect
// vertices of the same object and are built either from shared triangles,
// from a distance threshold, or both.
#pragma once

#include "deform/core.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace deform {

struct Triangle {
    VertexId a = 0, b = 0, c = 0;
};

// Undirected vertex pair, stored canonically with a < b.
struct Edge {
    VertexId a = 0, b = 0;

    Edge() = default;
    Edge(VertexId u, VertexId v) : a(std::min(u, v)), b(std::max(u, v)) {}
    friend bool operator<(const Edge& l, const Edge& r) {
        return l.a != r.a ? l.a < r.a : l.b < r.b;
    }
    friend bool operator==(const Edge& l, const Edge& r) { return l.a == r.a && l.b == r.b; }
};

struct ObjectModel {
    // Surface vertices first, interior points appended after them.
    std::vector<Vec3> rest_positions;
    // Triangles index surface vertices only.
    std::vector<Triangle> triangles;
    std::size_t surface_vertex_count = 0;
    // Mobility status per vertex: 0 = fixed in place, 1 = free to move.
    std::vector<std::uint8_t> mobility;
    // Constant external input force per vertex (e.g. gravity); default zero.
    std::vector<Vec3> external_force;
    // Undirected internal edges, deduplicated, no self-loops.
    std::vector<Edge> internal_edges;
    double stiffness_k = 1.0;
    double poisson_h = 0.0;

    std::size_t vertex_count() const { return rest_positions.size(); }
    std::size_t interior_count() const { return rest_positions.size() - surface_vertex_count; }
};

// Makes a model from raw surface geometry: everything mobile, no external
// force, no interior points, no edges.
inline ObjectModel make_object(std::vector<Vec3> positions, std::vector<Triangle> triangles,
                               double k = 1.0, double h = 0.0) {
    ObjectModel m;
    m.surface_vertex_count = positions.size();
    m.rest_positions = std::move(positions);
    m.triangles = std::move(triangles);
    m.mobility.assign(m.rest_positions.size(), 1);
    m.external_force.assign(m.rest_positions.size(), Vec3::Zero());
    m.stiffness_k = k;
    m.poisson_h = h;
    return m;
}

// Checks structural invariants; throws ValidationError on violation.
// Non-fatal oddities (no edges, no triangles) come back as warnings.
inline std::vector<std::string> validate(const ObjectModel& m) {
    const std::size_t n = m.vertex_count();
    if (m.surface_vertex_count > n)
        throw ValidationError("surface vertex count exceeds vertex list");
    if (m.mobility.size() != n || m.external_force.size() != n)
        throw ValidationError("mobility/external_force length does not match vertex count");
    if (!(m.stiffness_k > 0.0)) throw ValidationError("stiffness k must be positive");
    const double denom = 1.0 - m.poisson_h - 2.0 * m.poisson_h * m.poisson_h;
    if (std::abs(denom) <= 1e-12)
        throw ValidationError("poisson h makes the stiffness matrix singular (1 - h - 2h^2 = 0)");
    for (std::size_t i = 0; i < n; ++i) {
        if (!finite(m.rest_positions[i]))
            throw ValidationError("non-finite rest position at vertex " + std::to_string(i));
        if (m.mobility[i] > 1) throw ValidationError("mobility must be 0 or 1");
        if (!finite(m.external_force[i]))
            throw ValidationError("non-finite external force at vertex " + std::to_string(i));
    }
    for (const Triangle& t : m.triangles) {
        const VertexId s = static_cast<VertexId>(m.surface_vertex_count);
        if (t.a < 0 || t.b < 0 || t.c < 0 || t.a >= s || t.b >= s || t.c >= s)
            throw ValidationError("triangle index out of surface range");
        if (t.a == t.b || t.b == t.c || t.a == t.c)
            throw ValidationError("degenerate triangle with repeated vertex index");
    }
    for (const Edge& e : m.internal_edges) {
        if (e.a == e.b) throw ValidationError("internal edge is a self-loop");
        if (e.a < 0 || e.b < 0 || e.a >= static_cast<VertexId>(n) || e.b >= static_cast<VertexId>(n))
            throw ValidationError("internal edge index out of range");
    }
    std::vector<std::string> warnings;
    if (m.triangles.empty()) warnings.push_back("model has no triangles");
    if (m.internal_edges.empty()) warnings.push_back("model has no internal edges");
    return warnings;
}

// True when every undirected surface edge is used by exactly two triangles
// with opposite orientation (each directed edge appears exactly once).
inline bool watertight(const ObjectModel& m) {
    if (m.triangles.empty()) return false;
    std::map<std::pair<VertexId, VertexId>, int> directed;
    for (const Triangle& t : m.triangles) {
        ++directed[{t.a, t.b}];
        ++directed[{t.b, t.c}];
        ++directed[{t.c, t.a}];
    }
    for (const auto& [e, count] : directed) {
        if (count != 1) return false;
        auto rev = directed.find({e.second, e.first});
        if (rev == directed.end() || rev->second != 1) return false;
    }
    return true;
}

enum class EdgeMode {
    shared_polygon,      // one edge per vertex pair co-occurring in a triangle
    distance_threshold,  // edge per vertex pair with rest distance < threshold
    combined,            // shared_polygon on the surface plus distance edges
                         // touching at least one interior point
};

// Builds the undirected internal edge set. Surface coordinates, triangles and
// interior points are left untouched; only internal_edges is replaced.
inline ObjectModel build_internal_edges(const ObjectModel& model, EdgeMode mode,
                                        double threshold = 0.0) {
    if (mode != EdgeMode::shared_polygon && !(threshold > 0.0))
        throw ValidationError("distance threshold must be positive");

    std::set<Edge> edges;
    auto add_shared_polygon = [&] {
        for (const Triangle& t : model.triangles) {
            edges.insert(Edge(t.a, t.b));
            edges.insert(Edge(t.b, t.c));
            edges.insert(Edge(t.a, t.c));
        }
    };
    const auto n = static_cast<VertexId>(model.vertex_count());
    const auto s = static_cast<VertexId>(model.surface_vertex_count);
    auto add_distance = [&](bool interior_only) {
        const double thr2 = threshold * threshold;
        for (VertexId i = 0; i < n; ++i) {
            // In combined mode only pairs touching an interior point qualify,
            // so the first endpoint can start at the interior range.
            const VertexId j0 = (interior_only && i < s) ? s : i + 1;
            for (VertexId j = std::max(j0, static_cast<VertexId>(i + 1)); j < n; ++j) {
                const double d2 = (model.rest_positions[i] - model.rest_positions[j]).squaredNorm();
                if (d2 < thr2) edges.insert(Edge(i, j));
            }
        }
    };

    switch (mode) {
        case EdgeMode::shared_polygon:
            add_shared_polygon();
            break;
        case EdgeMode::distance_threshold:
            add_distance(false);
            break;
        case EdgeMode::combined:
            add_shared_polygon();
            add_distance(true);
            break;
    }

    ObjectModel out = model;
    out.internal_edges.assign(edges.begin(), edges.end());
    return out;
}

}  // namespace deform
