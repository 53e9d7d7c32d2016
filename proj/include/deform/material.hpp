// material.hpp — isotropic force/displacement matrices.
//
// Per object, a scalar stiffness k and Poisson parameter h define the 3x3
// compliance matrix K_inv (displacement per force) and its inverse K (force
// per displacement):
//
//   K_inv = (1/k) [ 1 -h -h; -h 1 -h; -h -h 1 ]
//   K     = (k / (1 - h - 2h^2)) [ 1-h h h; h 1-h h; h h 1-h ]
//
// K is singular at h = 0.5 and h = -1. The physical Poisson range is
// (-1, 0.5); values outside it are accepted as long as K stays regular,
// since h acts as a free coupling knob here.
#pragma once

#include "deform/core.hpp"

namespace deform {

inline Mat3 compliance_matrix(double k, double h) {
    if (!(k > 0.0)) throw ValidationError("stiffness k must be positive");
    Mat3 m;
    m << 1.0, -h, -h,
         -h, 1.0, -h,
         -h, -h, 1.0;
    return m / k;
}

inline Mat3 stiffness_matrix(double k, double h) {
    if (!(k > 0.0)) throw ValidationError("stiffness k must be positive");
    const double denom = 1.0 - h - 2.0 * h * h;
    if (std::abs(denom) <= 1e-12)
        throw ValidationError("singular material: 1 - h - 2h^2 vanishes (h = 0.5 or h = -1)");
    Mat3 m;
    m << 1.0 - h, h, h,
         h, 1.0 - h, h,
         h, h, 1.0 - h;
    return m * (k / denom);
}

struct MaterialMatrices {
    Mat3 K = Mat3::Identity();
    Mat3 K_inv = Mat3::Identity();
    double k = 1.0;
    double h = 0.0;
};

inline MaterialMatrices make_material(double k, double h) {
    return MaterialMatrices{stiffness_matrix(k, h), compliance_matrix(k, h), k, h};
}

}  // namespace deform
