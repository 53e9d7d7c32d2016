// network.hpp — the dynamic vertex network and its update phases.
//
// The network's vertices are the vertices of both objects (object A first,
// then object B, global ids 0..N-1). Every undirected internal edge becomes
// two directed edges; the signal stored on a directed edge is the elastic
// force applied to the edge's head:
//
//   s(u -> v) = (1/2)^(Status(u)*Status(v)) * K * ((chi1(u)-P(u)) - (chi1(v)-P(v)))
//
// so a displaced vertex feels a restoring force through its own incoming
// edges while dragging its neighbours along through the reverse edges, and
// the two directions of a pair always sum to zero. External edges exist only
// where a correspondence does: the edge (receiver v_n, source v_m) with
// v_m in chi2(v_n) carries v_m's net internal force, divided by the size of
// v_m's own correspondence set, across the contact to v_n. That transfer is
// what lets the two bodies' restoring forces negate each other at contact.
//
// Every phase reads a snapshot of the previous phase, so results do not
// depend on vertex evaluation order.
#pragma once

#include "deform/collision.hpp"
#include "deform/core.hpp"
#include "deform/material.hpp"
#include "deform/mesh.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace deform {

struct Network {
    // Per-vertex constants.
    std::vector<Vec3> rest;                 // P
    std::vector<std::uint8_t> status;       // 0 fixed, 1 mobile
    std::vector<Vec3> external_input;       // s_in
    std::vector<std::uint8_t> object_of;    // 0 = A, 1 = B
    std::array<MaterialMatrices, 2> materials;
    std::size_t count_a = 0;

    // Directed internal edges, sorted by (to, from); in_offset is the CSR
    // index of each vertex's incoming edge range.
    std::vector<VertexId> edge_from;
    std::vector<VertexId> edge_to;
    std::vector<double> edge_factor;        // (1/2)^(Status*Status)
    std::vector<std::uint8_t> edge_object;
    std::vector<std::int32_t> in_offset;    // size N+1

    std::size_t vertex_count() const { return rest.size(); }
    std::size_t edge_count() const { return edge_from.size(); }

    // Correction weight for vertex v: k_other / (k_a + k_b), which reduces to
    // 1/2 for equal stiffness. The stiffer object's vertices move less.
    double correction_weight(VertexId v) const {
        const int o = object_of[static_cast<std::size_t>(v)];
        return materials[1 - o].k / (materials[0].k + materials[1].k);
    }
};

// Mutable vertex state. chi3 (the update count) is synchronous across the
// network, so it is stored once.
struct NetworkState {
    std::vector<Vec3> chi1;
    Correspondence chi2;
    int update_count = 0;
};

// A directed contact edge carrying `signal` to `receiver`.
struct ExternalEdge {
    VertexId receiver = 0;
    VertexId source = 0;
    Vec3 signal = Vec3::Zero();
};
using ExternalEdgeSet = std::vector<ExternalEdge>;

using DetectFn = std::function<Correspondence(std::span<const Vec3>)>;

inline Network build_network(const ObjectModel& model_a, const ObjectModel& model_b) {
    Network net;
    net.count_a = model_a.vertex_count();
    const std::size_t n = model_a.vertex_count() + model_b.vertex_count();
    net.rest.reserve(n);
    net.status.reserve(n);
    net.external_input.reserve(n);
    net.object_of.reserve(n);
    net.materials[0] = make_material(model_a.stiffness_k, model_a.poisson_h);
    net.materials[1] = make_material(model_b.stiffness_k, model_b.poisson_h);

    const ObjectModel* models[2] = {&model_a, &model_b};
    for (int o = 0; o < 2; ++o) {
        const ObjectModel& m = *models[o];
        net.rest.insert(net.rest.end(), m.rest_positions.begin(), m.rest_positions.end());
        net.status.insert(net.status.end(), m.mobility.begin(), m.mobility.end());
        net.external_input.insert(net.external_input.end(), m.external_force.begin(),
                                  m.external_force.end());
        net.object_of.insert(net.object_of.end(), m.vertex_count(), static_cast<std::uint8_t>(o));
    }

    const VertexId offset_b = static_cast<VertexId>(model_a.vertex_count());
    std::vector<std::pair<VertexId, VertexId>> directed;  // (to, from)
    directed.reserve(2 * (model_a.internal_edges.size() + model_b.internal_edges.size()));
    for (int o = 0; o < 2; ++o) {
        const VertexId off = o == 0 ? 0 : offset_b;
        for (const Edge& e : models[o]->internal_edges) {
            directed.emplace_back(off + e.a, off + e.b);
            directed.emplace_back(off + e.b, off + e.a);
        }
    }
    std::sort(directed.begin(), directed.end());

    const std::size_t m = directed.size();
    net.edge_from.resize(m);
    net.edge_to.resize(m);
    net.edge_factor.resize(m);
    net.edge_object.resize(m);
    net.in_offset.assign(n + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
        const auto [to, from] = directed[i];
        net.edge_to[i] = to;
        net.edge_from[i] = from;
        net.edge_factor[i] =
            (net.status[static_cast<std::size_t>(to)] && net.status[static_cast<std::size_t>(from)])
                ? 0.5
                : 1.0;
        net.edge_object[i] = net.object_of[static_cast<std::size_t>(to)];
        ++net.in_offset[static_cast<std::size_t>(to) + 1];
    }
    std::partial_sum(net.in_offset.begin(), net.in_offset.end(), net.in_offset.begin());
    return net;
}

// Signals of all directed internal edges at the current positions, indexed
// like the network's edge arrays.
inline std::vector<Vec3> update_internal_signals(const NetworkState& state, const Network& net) {
    std::vector<Vec3> signals(net.edge_count());
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto from = static_cast<std::size_t>(net.edge_from[e]);
        const auto to = static_cast<std::size_t>(net.edge_to[e]);
        const Vec3 rel = (state.chi1[from] - net.rest[from]) - (state.chi1[to] - net.rest[to]);
        signals[e] = net.edge_factor[e] * (net.materials[net.edge_object[e]].K * rel);
    }
    return signals;
}

// Sum of incoming internal signals per vertex.
inline std::vector<Vec3> net_internal_forces(const Network& net, std::span<const Vec3> signals) {
    std::vector<Vec3> sums(net.vertex_count(), Vec3::Zero());
    for (std::size_t v = 0; v < net.vertex_count(); ++v)
        for (std::int32_t e = net.in_offset[v]; e < net.in_offset[v + 1]; ++e)
            sums[v] += signals[static_cast<std::size_t>(e)];
    return sums;
}

// Builds the sparse contact edge set from the current correspondences. The
// divisor is the size of the source's own correspondence set; a source that
// is a correspondent without being penetrating itself has an empty set, in
// which case the divisor is taken as 1.
inline ExternalEdgeSet update_external_signals(const NetworkState& state, const Network& net,
                                               std::span<const Vec3> internal_signals) {
    const std::vector<Vec3> net_internal = net_internal_forces(net, internal_signals);
    ExternalEdgeSet out;
    for (const auto& [receiver, sources] : state.chi2) {
        for (VertexId src : sources) {
            auto it = state.chi2.find(src);
            const double divisor =
                it == state.chi2.end() || it->second.empty()
                    ? 1.0
                    : static_cast<double>(it->second.size());
            out.push_back(ExternalEdge{receiver, src,
                                       net_internal[static_cast<std::size_t>(src)] / divisor});
        }
    }
    return out;
}

// Net force on every vertex: external input plus all incoming internal and
// external signals. This is both the quantity the force step integrates and
// the residual the termination condition inspects.
inline std::vector<Vec3> net_forces(const NetworkState& state, const Network& net,
                                    std::span<const Vec3> internal_signals,
                                    const ExternalEdgeSet& external_signals) {
    std::vector<Vec3> forces = net_internal_forces(net, internal_signals);
    for (std::size_t v = 0; v < net.vertex_count(); ++v) forces[v] += net.external_input[v];
    for (const ExternalEdge& e : external_signals)
        forces[static_cast<std::size_t>(e.receiver)] += e.signal;
    return forces;
}

// Damping schedule alpha = gamma^(beta*chi3 + 1).
inline double alpha(double gamma, double beta, int chi3) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (chi3 < 0) throw ConfigError("update count must be non-negative");
    return std::pow(gamma, beta * chi3 + 1.0);
}

// Force-driven displacement: chi1' = chi1 + Status * alpha * K_inv * force.
// All updates are computed from the same snapshot; fixed vertices are copied
// untouched so their coordinates stay bit-exact.
inline std::vector<Vec3> step_force(const NetworkState& state, const Network& net,
                                    std::span<const Vec3> forces, double alpha_value) {
    std::vector<Vec3> next = state.chi1;
    for (std::size_t v = 0; v < net.vertex_count(); ++v) {
        if (!net.status[v]) continue;
        next[v] += alpha_value * (net.materials[net.object_of[v]].K_inv * forces[v]);
    }
    return next;
}

// Moves every vertex with a fresh correspondence toward the mean of its
// correspondents by the stiffness weight k_other/(k_a+k_b). Targets are read
// from the input snapshot, so mutual pairs land consistently.
inline std::vector<Vec3> penetration_correction(const Network& net,
                                                const std::vector<Vec3>& positions,
                                                const Correspondence& fresh_corr) {
    std::vector<Vec3> next = positions;
    for (const auto& [v, targets] : fresh_corr) {
        if (targets.empty() || !net.status[static_cast<std::size_t>(v)]) continue;
        Vec3 mean = Vec3::Zero();
        for (VertexId t : targets) mean += positions[static_cast<std::size_t>(t)];
        mean /= static_cast<double>(targets.size());
        const double w = net.correction_weight(v);
        next[static_cast<std::size_t>(v)] =
            positions[static_cast<std::size_t>(v)] +
            w * (mean - positions[static_cast<std::size_t>(v)]);
    }
    return next;
}

// Initial state: chi2(0) from collision detection over the rest positions,
// chi1(0) as the stiffness-weighted correction of the rest positions, and an
// update count of zero.
inline NetworkState init_state(const Network& net, const DetectFn& detect_fn) {
    NetworkState state;
    state.chi2 = detect_fn(net.rest);
    state.chi1 = penetration_correction(net, net.rest, state.chi2);
    state.update_count = 0;
    return state;
}

}  // namespace deform
