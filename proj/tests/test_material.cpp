#include "deform/material.hpp"

#include <catch2/catch.hpp>

using namespace deform;

TEST_CASE("compliance matrix: decoupled and scaled cases") {
    CHECK(compliance_matrix(1.0, 0.0).isApprox(Mat3::Identity(), 0.0));
    CHECK(compliance_matrix(2.0, 0.0).isApprox(0.5 * Mat3::Identity(), 1e-15));

    Mat3 expected;
    expected << 1, -0.25, -0.25, -0.25, 1, -0.25, -0.25, -0.25, 1;
    CHECK(compliance_matrix(1.0, 0.25).isApprox(expected, 1e-15));
}

TEST_CASE("stiffness matrix: h = 0 is pure axis stiffness") {
    CHECK(stiffness_matrix(1.0, 0.0).isApprox(Mat3::Identity(), 0.0));
    CHECK(stiffness_matrix(3.0, 0.0).isApprox(3.0 * Mat3::Identity(), 1e-15));
}

TEST_CASE("stiffness and compliance are exact inverses over the parameter grid") {
    for (double k : {0.5, 1.0, 3.0, 10.0})
        for (double h : {0.0, 0.1, 0.3, 0.45}) {
            const Mat3 product = stiffness_matrix(k, h) * compliance_matrix(k, h);
            CHECK((product - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        }
}

TEST_CASE("both matrices symmetric; compliance diagonal is 1/k") {
    for (double k : {0.5, 2.0, 7.5})
        for (double h : {-0.2, 0.0, 0.3}) {
            const Mat3 kinv = compliance_matrix(k, h);
            const Mat3 kmat = stiffness_matrix(k, h);
            CHECK((kinv - kinv.transpose()).cwiseAbs().maxCoeff() == 0.0);
            CHECK((kmat - kmat.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (int i = 0; i < 3; ++i) CHECK(kinv(i, i) == 1.0 / k);
        }
}

TEST_CASE("stiffness is linear in k") {
    const Mat3 base = stiffness_matrix(1.0, 0.2);
    const Mat3 scaled = stiffness_matrix(4.0, 0.2);
    CHECK((scaled - 4.0 * base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(compliance_matrix(0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(compliance_matrix(-1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(stiffness_matrix(1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(stiffness_matrix(1.0, -1.0), ValidationError);
}

TEST_CASE("make_material bundles a consistent pair") {
    const MaterialMatrices m = make_material(3.0, 0.1);
    CHECK(m.k == 3.0);
    CHECK(m.h == 0.1);
    CHECK((m.K * m.K_inv - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}
