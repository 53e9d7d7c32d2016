#include "deform/network.hpp"
#include "deform/scenario.hpp"

#include <catch2/catch.hpp>

#include <map>
#include <random>

using namespace deform;

namespace {

// Two-object fixture: builds models with explicit edges, no triangles needed.
ObjectModel bare_object(std::vector<Vec3> positions, std::vector<Edge> edges, double k = 1.0,
                        double h = 0.0) {
    ObjectModel m = make_object(std::move(positions), {}, k, h);
    m.internal_edges = std::move(edges);
    return m;
}

std::vector<Vec3> forces_of(const NetworkState& st, const Network& net) {
    const auto sig = update_internal_signals(st, net);
    const auto ext = update_external_signals(st, net, sig);
    return net_forces(st, net, sig, ext);
}

}  // namespace

TEST_CASE("build_network: two single-triangle objects") {
    ObjectModel a = make_object({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Triangle{0, 1, 2}});
    ObjectModel b = make_object({Vec3(5, 0, 0), Vec3(6, 0, 0), Vec3(5, 1, 0)}, {Triangle{0, 1, 2}});
    a = build_internal_edges(a, EdgeMode::shared_polygon);
    b = build_internal_edges(b, EdgeMode::shared_polygon);
    Network net = build_network(a, b);
    CHECK(net.vertex_count() == 6);
    CHECK(net.edge_count() == 12);
    CHECK(net.count_a == 3);
    for (std::size_t e = 0; e < net.edge_count(); ++e)
        CHECK(net.object_of[net.edge_from[e]] == net.object_of[net.edge_to[e]]);
}

TEST_CASE("init_state: no penetration leaves rest positions") {
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Edge(0, 1)});
    ObjectModel b = bare_object({Vec3(9, 0, 0), Vec3(10, 0, 0)}, {Edge(0, 1)});
    Network net = build_network(a, b);
    NetworkState st = init_state(net, [](std::span<const Vec3>) { return Correspondence{}; });
    CHECK(st.update_count == 0);
    CHECK(st.chi2.empty());
    for (std::size_t v = 0; v < net.vertex_count(); ++v) CHECK(st.chi1[v] == net.rest[v]);
}

TEST_CASE("init_state: equal stiffness moves to the midpoint") {
    ObjectModel a = bare_object({Vec3(0, 0, 0)}, {});
    ObjectModel b = bare_object({Vec3(2, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st = init_state(net, [](std::span<const Vec3>) {
        return Correspondence{{0, {1}}};
    });
    CHECK(st.chi1[0] == Vec3(1, 0, 0));
}

TEST_CASE("init_state: stiffness-weighted correction favors the stiffer object") {
    ObjectModel a = bare_object({Vec3(0, 0, 0)}, {}, 1.0);
    ObjectModel b = bare_object({Vec3(2, 0, 0)}, {}, 3.0);
    Network net = build_network(a, b);
    NetworkState st = init_state(net, [](std::span<const Vec3>) {
        return Correspondence{{0, {1}}};
    });
    CHECK(st.chi1[0] == Vec3(1.5, 0, 0));  // weight k_other/(k1+k2) = 3/4
}

TEST_CASE("internal signals: rest state and fixed pairs give zero") {
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Edge(0, 1)});
    a.mobility = {0, 0};
    ObjectModel b = bare_object({Vec3(5, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    for (const Vec3& s : update_internal_signals(st, net)) CHECK(s == Vec3::Zero());
}

TEST_CASE("internal signals: mobile pair splits the force") {
    // v0 at rest, v1 displaced +1 in x, k = 1, h = 0, both mobile.
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Edge(0, 1)});
    ObjectModel b = bare_object({Vec3(9, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    st.chi1[1] += Vec3(1, 0, 0);
    const auto sig = update_internal_signals(st, net);
    std::map<std::pair<VertexId, VertexId>, Vec3> by_pair;
    for (std::size_t e = 0; e < net.edge_count(); ++e)
        by_pair[{net.edge_from[e], net.edge_to[e]}] = sig[e];
    // Edge from the displaced vertex carries +0.5 onto its neighbour; the
    // reverse edge restores the displaced vertex with -0.5.
    CHECK(by_pair[{1, 0}] == Vec3(0.5, 0, 0));
    CHECK(by_pair[{0, 1}] == Vec3(-0.5, 0, 0));
}

TEST_CASE("internal signals: edges to fixed vertices carry the full force") {
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Edge(0, 1)});
    a.mobility = {0, 1};  // v0 fixed
    ObjectModel b = bare_object({Vec3(9, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    st.chi1[1] += Vec3(1, 0, 0);
    const auto sig = update_internal_signals(st, net);
    for (std::size_t e = 0; e < net.edge_count(); ++e)
        if (net.edge_to[e] == 1) CHECK(sig[e] == Vec3(-1, 0, 0));  // factor (1/2)^0 = 1
}

TEST_CASE("internal signals: directed pairs sum to exactly zero") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec3> pos;
    for (int i = 0; i < 12; ++i) pos.emplace_back(u(rng), u(rng), u(rng));
    std::vector<Edge> edges;
    for (int i = 0; i < 12; ++i) edges.emplace_back(i, (i + 3) % 12);
    ObjectModel a = bare_object(pos, edges, 2.7, 0.23);
    ObjectModel b = bare_object({Vec3(99, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    for (std::size_t v = 0; v < 12; ++v) st.chi1[v] += Vec3(u(rng), u(rng), u(rng));
    st.chi1[3] = net.rest[3];  // mix of moved and resting vertices

    const auto sig = update_internal_signals(st, net);
    std::map<std::pair<VertexId, VertexId>, std::size_t> index;
    for (std::size_t e = 0; e < net.edge_count(); ++e)
        index[{net.edge_from[e], net.edge_to[e]}] = e;
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const std::size_t rev = index.at({net.edge_to[e], net.edge_from[e]});
        CHECK((sig[e] + sig[rev]) == Vec3::Zero());
    }
}

TEST_CASE("external signals: empty correspondence, division, and sparsity") {
    // Object A: vertex 0 displaced -1 in x with three fixed neighbours, so its
    // incoming internal force is (3, 0, 0). Object B: three vertices.
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)},
                                {Edge(0, 1), Edge(0, 2), Edge(0, 3)});
    a.mobility = {1, 0, 0, 0};
    ObjectModel b = bare_object({Vec3(5, 0, 0), Vec3(6, 0, 0), Vec3(7, 0, 0)}, {});
    Network net = build_network(a, b);

    NetworkState st{net.rest, {}, 0};
    st.chi1[0] += Vec3(-1, 0, 0);
    const auto sig = update_internal_signals(st, net);

    SECTION("no correspondences, no external edges") {
        CHECK(update_external_signals(st, net, sig).empty());
    }

    SECTION("source force divided by its own correspondence count") {
        // Vertex 0 has three correspondents (divisor 3); each of the three
        // B-side vertices receives (1, 0, 0) from it.
        st.chi2 = {{0, {4, 5, 6}}, {4, {0}}, {5, {0}}, {6, {0}}};
        const ExternalEdgeSet ext = update_external_signals(st, net, sig);
        std::size_t expected_pairs = 0;
        for (const auto& [v, targets] : st.chi2) expected_pairs += targets.size();
        CHECK(ext.size() == expected_pairs);
        for (const ExternalEdge& e : ext)
            if (e.source == 0) CHECK((e.signal - Vec3(1, 0, 0)).norm() < 1e-15);
    }
}

TEST_CASE("external signals: symmetric pair receives equal and opposite forces") {
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Edge(0, 1)});
    a.mobility = {0, 1};
    ObjectModel b = bare_object({Vec3(3, 0, 0), Vec3(2, 0, 0)}, {Edge(0, 1)});
    b.mobility = {0, 1};
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    st.chi1[1] += Vec3(0.4, 0, 0);   // a1 toward b
    st.chi1[3] += Vec3(-0.4, 0, 0);  // b1 toward a
    st.chi2 = {{1, {3}}, {3, {1}}};
    const auto sig = update_internal_signals(st, net);
    const ExternalEdgeSet ext = update_external_signals(st, net, sig);
    REQUIRE(ext.size() == 2);
    Vec3 to_a1 = Vec3::Zero(), to_b1 = Vec3::Zero();
    for (const ExternalEdge& e : ext) (e.receiver == 1 ? to_a1 : to_b1) += e.signal;
    CHECK((to_a1 + to_b1).norm() < 1e-15);
    CHECK(to_a1.norm() > 0.0);
}

TEST_CASE("alpha schedule") {
    CHECK(alpha(0.1, 0.0, 0) == Approx(0.1));
    CHECK(alpha(0.1, 0.0, 500) == Approx(0.1));
    CHECK(alpha(0.5, 1.0, 1) == Approx(0.25));
    CHECK(alpha(0.1, 0.5, 2) == Approx(0.01));
    CHECK_THROWS_AS(alpha(1.5, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(alpha(0.0, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(alpha(0.5, 1.5, 0), ConfigError);
    CHECK_THROWS_AS(alpha(0.5, 0.5, -1), ConfigError);
}

TEST_CASE("step_force: zero net force is a fixed point; fixed vertices never move") {
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0)}, {Edge(0, 1)});
    a.mobility = {0, 1};
    a.external_force[0] = Vec3(100, 0, 0);  // fixed vertex ignores any force
    ObjectModel b = bare_object({Vec3(9, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    const auto f = forces_of(st, net);
    const auto next = step_force(st, net, f, 0.1);
    CHECK(next[0] == net.rest[0]);
    CHECK(next[1] == net.rest[1]);
}

TEST_CASE("step_force: single mobile vertex moves by alpha * K_inv * force") {
    ObjectModel a = bare_object({Vec3(0, 0, 0)}, {});
    a.external_force[0] = Vec3(1, 0, 0);
    ObjectModel b = bare_object({Vec3(9, 0, 0)}, {});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    const auto f = forces_of(st, net);
    const auto next = step_force(st, net, f, 0.1);
    CHECK((next[0] - Vec3(0.1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("penetration_correction: empty correspondence is a no-op") {
    ObjectModel a = bare_object({Vec3(1, 2, 3)}, {});
    ObjectModel b = bare_object({Vec3(9, 0, 0)}, {});
    Network net = build_network(a, b);
    const auto next = penetration_correction(net, net.rest, {});
    CHECK(next == net.rest);
}

TEST_CASE("penetration_correction: equal stiffness lands at half depth exactly") {
    ObjectModel a = bare_object({Vec3(0, 0, 0)}, {});
    ObjectModel b = bare_object({Vec3(4, 0, 0)}, {});
    Network net = build_network(a, b);
    const auto next = penetration_correction(net, net.rest, {{0, {1}}});
    CHECK(next[0] == Vec3(2, 0, 0));
}

TEST_CASE("penetration_correction: mutual pair computed from one snapshot") {
    ObjectModel a = bare_object({Vec3(0, 0, 0)}, {});
    ObjectModel b = bare_object({Vec3(4, 0, 0)}, {});
    Network net = build_network(a, b);
    const auto next = penetration_correction(net, net.rest, {{0, {1}}, {1, {0}}});
    CHECK(next[0] == Vec3(2, 0, 0));
    CHECK(next[1] == Vec3(2, 0, 0));
}

TEST_CASE("penetration_correction: fixed vertices stay put") {
    ObjectModel a = bare_object({Vec3(0, 0, 0)}, {});
    a.mobility = {0};
    ObjectModel b = bare_object({Vec3(4, 0, 0)}, {});
    Network net = build_network(a, b);
    const auto next = penetration_correction(net, net.rest, {{0, {1}}});
    CHECK(next[0] == Vec3(0, 0, 0));
}

TEST_CASE("one full quiescent iteration leaves the state untouched") {
    ObjectModel a = bare_object({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)},
                                {Edge(0, 1), Edge(1, 2), Edge(0, 2)});
    ObjectModel b = bare_object({Vec3(9, 0, 0), Vec3(10, 0, 0)}, {Edge(0, 1)});
    Network net = build_network(a, b);
    NetworkState st{net.rest, {}, 0};
    const auto f = forces_of(st, net);
    auto stepped = step_force(st, net, f, alpha(0.1, 0.0, st.update_count));
    CHECK(stepped == net.rest);
    auto corrected = penetration_correction(net, stepped, {});
    CHECK(corrected == net.rest);
}

TEST_CASE("external edge storage stays as sparse as the correspondences") {
    // Two interpenetrating cubes driven through several full iterations; the
    // stored contact edge count must equal the summed correspondence sizes
    // after every signal update.
    ObjectModel a = make_grid_cube(Vec3(0, 0, 0.8), 2.0, 2);
    ObjectModel b = make_grid_cube(Vec3(0.1, 0.2, -0.8), 2.0, 2);
    a = apply_fixed_region(build_internal_edges(a, EdgeMode::shared_polygon),
                           FixedRegion{2, +1, 1.5});
    b = apply_fixed_region(build_internal_edges(b, EdgeMode::shared_polygon),
                           FixedRegion{2, -1, -1.5});
    Network net = build_network(a, b);
    const std::size_t na = net.count_a;
    DetectFn dfn = [&](std::span<const Vec3> pos) {
        return detect(pos.first(na), pos.subspan(na), a, b, {});
    };
    NetworkState st = init_state(net, dfn);
    bool saw_contact = false;
    for (int t = 0; t < 10; ++t) {
        const auto sig = update_internal_signals(st, net);
        const ExternalEdgeSet ext = update_external_signals(st, net, sig);
        std::size_t expected = 0;
        for (const auto& [v, targets] : st.chi2) expected += targets.size();
        CHECK(ext.size() == expected);
        saw_contact = saw_contact || !ext.empty();
        for (const ExternalEdge& e : ext) {
            auto it = st.chi2.find(e.receiver);
            REQUIRE(it != st.chi2.end());
            CHECK(std::find(it->second.begin(), it->second.end(), e.source) != it->second.end());
        }
        const auto forces = net_forces(st, net, sig, ext);
        const auto stepped = step_force(st, net, forces, alpha(0.1, 0.0, st.update_count));
        const Correspondence fresh = dfn(stepped);
        st.chi1 = penetration_correction(net, stepped, fresh);
        st.chi2 = fresh;
        st.update_count += 1;
    }
    CHECK(saw_contact);
}

TEST_CASE("vertex order does not change the physics") {
    // Same two-object scene built with object A's vertices listed in two
    // different orders; signals and steps must agree through the relabeling.
    std::vector<Vec3> pos = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
    std::vector<Edge> edges = {Edge(0, 1), Edge(1, 2), Edge(2, 3), Edge(3, 0), Edge(0, 2)};
    ObjectModel a1 = bare_object(pos, edges, 2.0, 0.1);

    const std::vector<VertexId> perm = {2, 0, 3, 1};  // new id of old vertex i
    std::vector<Vec3> pos2(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos2[perm[i]] = pos[i];
    std::vector<Edge> edges2;
    for (const Edge& e : edges) edges2.emplace_back(perm[e.a], perm[e.b]);
    ObjectModel a2 = bare_object(pos2, edges2, 2.0, 0.1);

    ObjectModel b = bare_object({Vec3(9, 0, 0)}, {});
    Network n1 = build_network(a1, b);
    Network n2 = build_network(a2, b);

    NetworkState s1{n1.rest, {}, 0};
    NetworkState s2{n2.rest, {}, 0};
    const Vec3 kick(0.3, -0.2, 0.05);
    s1.chi1[1] += kick;
    s2.chi1[perm[1]] += kick;

    for (int it = 0; it < 5; ++it) {
        auto f1 = forces_of(s1, n1);
        auto f2 = forces_of(s2, n2);
        s1.chi1 = step_force(s1, n1, f1, 0.1);
        s2.chi1 = step_force(s2, n2, f2, 0.1);
        for (std::size_t i = 0; i < pos.size(); ++i)
            CHECK((s1.chi1[i] - s2.chi1[perm[i]]).cwiseAbs().maxCoeff() < 1e-12);
    }
}
