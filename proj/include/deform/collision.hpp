// collision.hpp — penetration detection between two closed triangle meshes.
//
// detect() finds, for every vertex of one object strictly inside the other
// object's surface, the set of corresponding surface vertices in that other
// object: the nearest ones, or the ones best aligned with the radial ray
// from a given center. brute_force_detect() is the same contract with no
// acceleration, kept as an independent reference path.
//
// Insidedness is ray-crossing parity. The primary ray direction is fixed and
// slightly off-axis; when a cast grazes an edge/vertex (barycentric
// coordinate within 1e-9) or the origin sits on the surface plane, the cast
// is retried along a deterministic ladder of fallback directions. If every
// direction stays ambiguous the point is either on the surface (-> outside)
// or the surface is unusable (-> GeometryError).
#pragma once

#include "deform/core.hpp"
#include "deform/mesh.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deform {

// For each penetrating vertex (global id), the corresponding vertices in the
// other object. Non-penetrating vertices are simply absent. Global ids:
// object A occupies [0, Na), object B occupies [Na, Na + Nb).
using Correspondence = std::map<VertexId, std::vector<VertexId>>;

struct PenetrationSummary {
    double max_depth = 0.0;
    std::size_t penetrating_count = 0;
};

enum class DetectMode { nearest, radial };

struct DetectParams {
    DetectMode mode = DetectMode::nearest;
    Vec3 radial_center = Vec3::Zero();  // used by radial mode only
    // Correspondents within this distance of the best score are all included.
    double tie_tolerance = 1e-9;
};

namespace detail {

enum class RayHit { miss, cross, marginal };

// Barycentric tolerance for declaring a hit too close to an edge/vertex.
inline constexpr double kBaryTol = 1e-9;

// Fixed primary ray direction (slightly off-axis so axis-aligned geometry is
// not degenerate) followed by fallback directions for grazing casts.
inline const std::array<Vec3, 8>& ray_directions() {
    static const std::array<Vec3, 8> dirs = [] {
        std::array<Vec3, 8> d;
        d[0] = Vec3(1.0, 1.4142135623730951e-4, 1.7320508075688772e-4).normalized();
        // Golden-angle spiral for the retries; generic, reproducible.
        for (int k = 1; k < 8; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / 8.0;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            const double phi = 2.399963229728653 * k + 0.7071067811865476;
            d[k] = Vec3(r * std::cos(phi), r * std::sin(phi), z).normalized();
        }
        return d;
    }();
    return dirs;
}

// One Moller-Trumbore cast against one triangle.
inline RayHit cast_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                            const Vec3& c) {
    const Vec3 e1 = b - a;
    const Vec3 e2 = c - a;
    const Vec3 pv = dir.cross(e2);
    const double det = e1.dot(pv);
    const double det_scale = e1.norm() * e2.norm();
    if (std::abs(det) <= 1e-13 * det_scale) {
        // Near-parallel or degenerate triangle. Only ambiguous when the ray
        // plane actually passes near the triangle; a distant parallel miss is
        // clean. Estimate via the origin's distance to the triangle plane.
        const Vec3 n = e1.cross(e2);
        const double n_norm = n.norm();
        if (n_norm <= 1e-16 * det_scale) return RayHit::marginal;  // degenerate triangle
        const double plane_dist = std::abs(n.dot(origin - a)) / n_norm;
        const double span = e1.norm() + e2.norm() + (origin - a).norm();
        return plane_dist > 1e-9 * std::max(1.0, span) ? RayHit::miss : RayHit::marginal;
    }
    const double inv = 1.0 / det;
    const Vec3 tv = origin - a;
    const double u = tv.dot(pv) * inv;
    if (u < -kBaryTol || u > 1.0 + kBaryTol) return RayHit::miss;
    const Vec3 qv = tv.cross(e1);
    const double v = dir.dot(qv) * inv;
    if (v < -kBaryTol || u + v > 1.0 + kBaryTol) return RayHit::miss;
    // Inside the triangle or within tolerance of its boundary?
    if (u < kBaryTol || v < kBaryTol || u + v > 1.0 - kBaryTol) return RayHit::marginal;
    const double t = e2.dot(qv) * inv;
    const double t_tol = 1e-9 * std::max(1.0, (origin - a).norm() + e1.norm() + e2.norm());
    if (t <= -t_tol) return RayHit::miss;
    if (t <= t_tol) return RayHit::marginal;  // origin sits on the surface
    return RayHit::cross;
}

// Squared distance from a point to a triangle (Ericson-style region walk).
inline double point_triangle_dist2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return (p - a).squaredNorm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return (p - b).squaredNorm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double t = d1 / (d1 - d3);
        return (p - (a + t * ab)).squaredNorm();
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return (p - c).squaredNorm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double t = d2 / (d2 - d6);
        return (p - (a + t * ac)).squaredNorm();
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + t * (c - b))).squaredNorm();
    }
    const Vec3 n = ab.cross(ac);
    const double dist = n.dot(ap);
    return dist * dist / n.squaredNorm();
}

// Uniform grid over the (y, z) footprint of the surface, valid for casts
// along the primary (x-dominant) ray direction only.
struct RayGrid {
    std::span<const Vec3> positions;
    std::span<const Triangle> triangles;
    Aabb box;
    int ny = 0, nz = 0;
    double y0 = 0, z0 = 0, inv_dy = 0, inv_dz = 0;
    std::vector<std::vector<std::int32_t>> bins;

    void build(std::span<const Vec3> pos, std::span<const Triangle> tris) {
        positions = pos;
        triangles = tris;
        box = Aabb{};
        for (const Triangle& t : tris) {
            box.expand(pos[t.a]);
            box.expand(pos[t.b]);
            box.expand(pos[t.c]);
        }
        const int n = std::clamp(static_cast<int>(std::sqrt(double(tris.size()))), 4, 64);
        ny = nz = n;
        const Vec3 ext = box.extent();
        // Pad bins for the primary direction's off-axis drift across the
        // x extent, plus a small absolute slack for the hit tolerances.
        const Vec3 d0 = ray_directions()[0];
        const double drift =
            ext.x() * std::max(std::abs(d0.y()), std::abs(d0.z())) / std::max(d0.x(), 1e-30);
        const double pad = drift + 1e-6 * std::max(1.0, box.diagonal());
        y0 = box.lo.y();
        z0 = box.lo.z();
        inv_dy = ny / std::max(ext.y(), 1e-30);
        inv_dz = nz / std::max(ext.z(), 1e-30);
        bins.assign(static_cast<std::size_t>(ny) * nz, {});
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(tris.size()); ++i) {
            const Triangle& t = tris[i];
            Aabb tb;
            tb.expand(pos[t.a]);
            tb.expand(pos[t.b]);
            tb.expand(pos[t.c]);
            const int jy0 = clamp_bin((tb.lo.y() - pad - y0) * inv_dy, ny);
            const int jy1 = clamp_bin((tb.hi.y() + pad - y0) * inv_dy, ny);
            const int jz0 = clamp_bin((tb.lo.z() - pad - z0) * inv_dz, nz);
            const int jz1 = clamp_bin((tb.hi.z() + pad - z0) * inv_dz, nz);
            for (int jy = jy0; jy <= jy1; ++jy)
                for (int jz = jz0; jz <= jz1; ++jz)
                    bins[static_cast<std::size_t>(jy) * nz + jz].push_back(i);
        }
    }

    static int clamp_bin(double v, int n) {
        return std::clamp(static_cast<int>(std::floor(v)), 0, n - 1);
    }

    const std::vector<std::int32_t>& candidates(const Vec3& p) const {
        const int jy = clamp_bin((p.y() - y0) * inv_dy, ny);
        const int jz = clamp_bin((p.z() - z0) * inv_dz, nz);
        return bins[static_cast<std::size_t>(jy) * nz + jz];
    }
};

// Counts crossings along one direction; nullopt when any cast is marginal.
template <typename TriRange>
inline std::optional<bool> parity(const Vec3& p, const Vec3& dir, std::span<const Vec3> pos,
                                  std::span<const Triangle> tris, const TriRange& indices) {
    int crossings = 0;
    for (const auto i : indices) {
        const Triangle& t = tris[i];
        switch (cast_triangle(p, dir, pos[t.a], pos[t.b], pos[t.c])) {
            case RayHit::miss: break;
            case RayHit::cross: ++crossings; break;
            case RayHit::marginal: return std::nullopt;
        }
    }
    return (crossings & 1) != 0;
}

struct AllTriangles {
    std::size_t n;
    struct It {
        std::size_t i;
        std::size_t operator*() const { return i; }
        It& operator++() { ++i; return *this; }
        bool operator!=(const It& o) const { return i != o.i; }
    };
    It begin() const { return {0}; }
    It end() const { return {n}; }
};

inline bool on_surface(const Vec3& p, std::span<const Vec3> pos, std::span<const Triangle> tris,
                       double tol) {
    const double tol2 = tol * tol;
    for (const Triangle& t : tris)
        if (point_triangle_dist2(p, pos[t.a], pos[t.b], pos[t.c]) <= tol2) return true;
    return false;
}

// Full inside test with the retry ladder. The grid, when given, accelerates
// the primary direction; retries always fall back to the full triangle list.
inline bool point_in_mesh_impl(const Vec3& p, std::span<const Vec3> pos,
                               std::span<const Triangle> tris, const RayGrid* grid) {
    if (tris.empty()) return false;
    const auto& dirs = ray_directions();
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        std::optional<bool> r;
        if (k == 0 && grid != nullptr)
            r = parity(p, dirs[0], pos, tris, grid->candidates(p));
        else
            r = parity(p, dirs[k], pos, tris, AllTriangles{tris.size()});
        if (r) return *r;
    }
    // Every direction grazed something. A point lying on the surface itself
    // is the common cause and is, by definition, not strictly inside.
    Aabb box;
    for (const Triangle& t : tris) {
        box.expand(pos[t.a]);
        box.expand(pos[t.b]);
        box.expand(pos[t.c]);
    }
    if (on_surface(p, pos, tris, 1e-9 * std::max(1.0, box.diagonal()))) return false;
    throw GeometryError(
        "point_in_mesh: crossing parity undetermined in every probe direction; "
        "surface is degenerate or not watertight");
}

}  // namespace detail

// True iff p lies strictly inside the closed surface. Points on the surface
// (within tolerance) are outside.
inline bool point_in_mesh(const Vec3& p, std::span<const Vec3> positions,
                          std::span<const Triangle> triangles) {
    return detail::point_in_mesh_impl(p, positions, triangles, nullptr);
}

inline bool point_in_mesh(const Vec3& p, const ObjectModel& model) {
    return point_in_mesh(p, std::span<const Vec3>(model.rest_positions),
                         std::span<const Triangle>(model.triangles));
}

namespace detail {

// Minimizers of `score` over `candidates`, every candidate within
// `tie_tolerance` of the best included, ids ascending.
template <typename Score>
inline std::vector<VertexId> collect_minimizers(const std::vector<VertexId>& candidates,
                                                Score&& score, double tie_tolerance) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> s(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        s[i] = score(candidates[i]);
        best = std::min(best, s[i]);
    }
    std::vector<VertexId> out;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (s[i] <= best + tie_tolerance) out.push_back(candidates[i]);
    return out;
}

// Distance from candidate point c to the ray {center + t*(q - center), t >= 0}.
inline double ray_distance(const Vec3& c, const Vec3& center, const Vec3& q) {
    const Vec3 axis = q - center;
    const double len = axis.norm();
    const Vec3 w = c - center;
    if (len <= 1e-30) return w.norm();  // degenerate ray: distance to center
    const Vec3 u = axis / len;
    const double t = w.dot(u);
    if (t <= 0.0) return w.norm();
    return (w - t * u).norm();
}

struct SurfaceRef {
    std::span<const Vec3> positions;  // all vertices of the object
    std::span<const Triangle> triangles;
    std::size_t surface_count = 0;
    VertexId global_offset = 0;
};

// Shared detect() skeleton; `inside` answers "is p strictly inside surface s".
template <typename InsideFn>
inline Correspondence detect_impl(const SurfaceRef& a, const SurfaceRef& b,
                                  const DetectParams& params, InsideFn&& inside) {
    std::array<std::vector<VertexId>, 2> penetrating;  // local ids, interior included
    const SurfaceRef* refs[2] = {&a, &b};
    for (int s = 0; s < 2; ++s) {
        const SurfaceRef& self = *refs[s];
        for (std::size_t i = 0; i < self.positions.size(); ++i)
            if (inside(self.positions[i], 1 - s)) penetrating[s].push_back(static_cast<VertexId>(i));
    }

    Correspondence corr;
    for (int s = 0; s < 2; ++s) {
        const SurfaceRef& self = *refs[s];
        const SurfaceRef& other = *refs[1 - s];
        if (penetrating[s].empty()) continue;

        // Candidate pool: the other object's surface vertices. Correction
        // targets live on the exit surface, so interior points never serve
        // as correspondents, while surface vertices remain valid targets
        // whether or not they currently penetrate (their penetration status
        // flickers as the contact tightens; the surface itself is stable).
        std::vector<VertexId> pool(other.surface_count);
        for (std::size_t i = 0; i < other.surface_count; ++i) pool[i] = static_cast<VertexId>(i);
        if (pool.empty()) continue;  // other object has no surface at all

        for (VertexId v : penetrating[s]) {
            const Vec3& q = self.positions[static_cast<std::size_t>(v)];
            std::vector<VertexId> picks;
            if (params.mode == DetectMode::nearest) {
                picks = collect_minimizers(
                    pool,
                    [&](VertexId c) { return (other.positions[static_cast<std::size_t>(c)] - q).norm(); },
                    params.tie_tolerance);
            } else {
                // Radial score: alignment with the ray from the center
                // through the query plus proximity to the query, so targets
                // sit along the radial exit direction without jumping to the
                // far side of the other object.
                picks = collect_minimizers(
                    pool,
                    [&](VertexId c) {
                        const Vec3& p = other.positions[static_cast<std::size_t>(c)];
                        return ray_distance(p, params.radial_center, q) + (p - q).norm();
                    },
                    params.tie_tolerance);
            }
            std::vector<VertexId>& out = corr[self.global_offset + v];
            out.reserve(picks.size());
            for (VertexId c : picks) out.push_back(other.global_offset + c);
        }
    }
    return corr;
}

}  // namespace detail

// Finds penetrating vertices of each object inside the other and their
// corresponding vertices. `positions_*` cover every vertex (surface first,
// interior after); insidedness is tested against the surface triangles at
// the given (possibly deformed) positions.
inline Correspondence detect(std::span<const Vec3> positions_a, std::span<const Vec3> positions_b,
                             const ObjectModel& model_a, const ObjectModel& model_b,
                             const DetectParams& params = {}) {
    if (positions_a.size() != model_a.vertex_count() || positions_b.size() != model_b.vertex_count())
        throw ValidationError("detect: position count does not match model");

    detail::SurfaceRef a{positions_a, model_a.triangles, model_a.surface_vertex_count, 0};
    detail::SurfaceRef b{positions_b, model_b.triangles, model_b.surface_vertex_count,
                         static_cast<VertexId>(model_a.vertex_count())};

    detail::RayGrid grid_a, grid_b;
    grid_a.build(positions_a, model_a.triangles);
    grid_b.build(positions_b, model_b.triangles);
    const detail::RayGrid* grids[2] = {&grid_a, &grid_b};

    return detail::detect_impl(a, b, params, [&](const Vec3& p, int other) {
        const detail::RayGrid& g = *grids[other];
        if (g.triangles.empty() || !g.box.contains(p)) return false;
        return detail::point_in_mesh_impl(p, g.positions, g.triangles, &g);
    });
}

// Reference implementation of detect(): exhaustive point-in-mesh tests and
// exhaustive candidate scans, no spatial acceleration. Intended for small
// meshes (~hundreds of vertices) and for validating detect().
inline Correspondence brute_force_detect(std::span<const Vec3> positions_a,
                                         std::span<const Vec3> positions_b,
                                         const ObjectModel& model_a, const ObjectModel& model_b,
                                         const DetectParams& params = {}) {
    if (positions_a.size() != model_a.vertex_count() || positions_b.size() != model_b.vertex_count())
        throw ValidationError("detect: position count does not match model");

    detail::SurfaceRef a{positions_a, model_a.triangles, model_a.surface_vertex_count, 0};
    detail::SurfaceRef b{positions_b, model_b.triangles, model_b.surface_vertex_count,
                         static_cast<VertexId>(model_a.vertex_count())};
    return detail::detect_impl(a, b, params, [&](const Vec3& p, int other) {
        const detail::SurfaceRef& o = other == 0 ? a : b;
        if (o.triangles.empty()) return false;
        return point_in_mesh(p, o.positions, o.triangles);
    });
}

// Magnitude of the correction target for vertex v: distance from v's current
// position to the mean of its correspondents' current positions.
inline double penetration_depth(VertexId v, std::span<const Vec3> all_positions,
                                const Correspondence& corr) {
    auto it = corr.find(v);
    if (it == corr.end())
        throw ValidationError("penetration_depth: vertex " + std::to_string(v) +
                              " has no correspondence entry");
    Vec3 mean = Vec3::Zero();
    for (VertexId w : it->second) mean += all_positions[static_cast<std::size_t>(w)];
    mean /= static_cast<double>(it->second.size());
    return (mean - all_positions[static_cast<std::size_t>(v)]).norm();
}

inline PenetrationSummary summarize_penetration(std::span<const Vec3> all_positions,
                                                const Correspondence& corr) {
    PenetrationSummary s;
    s.penetrating_count = corr.size();
    for (const auto& [v, _] : corr)
        s.max_depth = std::max(s.max_depth, penetration_depth(v, all_positions, corr));
    return s;
}

}  // namespace deform
