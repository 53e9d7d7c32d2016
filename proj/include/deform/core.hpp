// core.hpp — shared scalar/vector types and error hierarchy.
//
// Positions and forces are double-precision 3-vectors (Eigen). Coordinates
// are scene length units; the library is unit-agnostic.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace deform {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

using VertexId = std::int32_t;

// Thrown for unreadable/ill-formed input files (OBJ, config).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a model or argument violates a structural invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for out-of-range or inconsistent solver/scenario settings.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a geometric query cannot be answered (non-watertight or
// degenerate surface).
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool finite(const Vec3& v) {
    return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

// Axis-aligned bounding box.
struct Aabb {
    Vec3 lo{std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Aabb& o) {
        lo = lo.cwiseMin(o.lo);
        hi = hi.cwiseMax(o.hi);
    }
    bool contains(const Vec3& p) const {
        return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
    }
    bool empty() const { return (hi.array() < lo.array()).any(); }
    Vec3 extent() const { return empty() ? Vec3::Zero() : Vec3(hi - lo); }
    double diagonal() const { return extent().norm(); }
};

template <typename Iter>
Aabb bounding_box(Iter first, Iter last) {
    Aabb box;
    for (; first != last; ++first) box.expand(*first);
    return box;
}

}  // namespace deform
