// solver.hpp — iteration loop, termination condition and divergence guard.
//
// One iteration runs the five network phases: internal signals, external
// signals, force step, re-detection, penetration correction. Termination is
// evaluated at the top of each iteration from the current state: the run has
// converged when every correspondence offset (distance from a penetrating
// vertex to the mean of its correspondents) is below eps1 and every mobile
// vertex's net force magnitude is below eps2. Fixed vertices are excluded
// from the force criterion: they carry the boundary reaction forces, which
// do not decay and which the update rule never acts on.
//
// A (small) constant damping factor keeps the force/displacement feedback
// negative; runs that blow up anyway are cut off by the divergence guard
// before non-finite values can reach any output.
#pragma once

#include "deform/collision.hpp"
#include "deform/core.hpp"
#include "deform/mesh.hpp"
#include "deform/network.hpp"

#include <optional>
#include <span>
#include <vector>

namespace deform {

struct SolverConfig {
    double gamma = 0.1;
    double beta = 0.0;
    // Thresholds default to scene-derived values when unset:
    // eps1 = 1e-3 * combined bounding-box diagonal, eps2 = 1e-3 * k_max * eps1.
    std::optional<double> eps1;
    std::optional<double> eps2;
    int max_iterations = 10000;
    double divergence_factor = 10.0;
    int frame_stride = 100;
};

inline void validate_config(const SolverConfig& c) {
    if (!(c.gamma > 0.0 && c.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(c.beta >= 0.0 && c.beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (c.eps1 && !(*c.eps1 > 0.0)) throw ConfigError("eps1 must be positive");
    if (c.eps2 && !(*c.eps2 > 0.0)) throw ConfigError("eps2 must be positive");
    if (c.max_iterations <= 0) throw ConfigError("max_iterations must be positive");
    if (!(c.divergence_factor > 1.0)) throw ConfigError("divergence_factor must exceed 1");
    if (c.frame_stride < 1) throw ConfigError("frame_stride must be at least 1");
}

enum class Verdict { converged, max_iterations_reached, diverged };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::converged: return "converged";
        case Verdict::max_iterations_reached: return "max_iterations_reached";
        case Verdict::diverged: return "diverged";
    }
    return "unknown";
}

struct IterationRecord {
    int iteration = 0;
    double max_penetration = 0.0;
    double max_force_residual = 0.0;
    double max_displacement = 0.0;
};

struct ConvergenceReport {
    std::vector<IterationRecord> records;
    Verdict verdict = Verdict::max_iterations_reached;
    int final_iteration = 0;
};

struct Frame {
    int iteration = 0;
    std::vector<Vec3> positions;
};

struct RunResult {
    std::vector<Vec3> final_positions;
    Correspondence final_correspondence;  // chi2 of the terminal state
    ConvergenceReport report;
    std::vector<Frame> frames;
    double eps1 = 0.0;  // resolved thresholds actually used
    double eps2 = 0.0;
};

// Combined rest bounding-box diagonal of both objects; the length scale for
// default thresholds and the divergence guard.
inline double scene_diagonal(const ObjectModel& a, const ObjectModel& b) {
    Aabb box = bounding_box(a.rest_positions.begin(), a.rest_positions.end());
    box.expand(bounding_box(b.rest_positions.begin(), b.rest_positions.end()));
    return box.diagonal();
}

inline std::pair<double, double> resolve_thresholds(const SolverConfig& cfg,
                                                    const ObjectModel& a, const ObjectModel& b) {
    const double diag = scene_diagonal(a, b);
    const double eps1 = cfg.eps1.value_or(1e-3 * diag);
    const double k_max = std::max(a.stiffness_k, b.stiffness_k);
    const double eps2 = cfg.eps2.value_or(1e-3 * k_max * eps1);
    return {eps1, eps2};
}

// Largest correspondence offset |mean(correspondents) - position| over all
// vertices that currently have correspondents.
inline double max_penetration_offset(std::span<const Vec3> positions, const Correspondence& corr) {
    double worst = 0.0;
    for (const auto& [v, targets] : corr) {
        if (targets.empty()) continue;
        worst = std::max(worst, penetration_depth(v, positions, corr));
    }
    return worst;
}

// Largest net-force magnitude over mobile vertices.
inline double max_mobile_force(const Network& net, std::span<const Vec3> forces) {
    double worst = 0.0;
    for (std::size_t v = 0; v < net.vertex_count(); ++v)
        if (net.status[v]) worst = std::max(worst, forces[v].norm());
    return worst;
}

// True when the run should abort: the last recorded displacement exceeds
// divergence_factor times the scene diagonal, or the state went non-finite.
inline bool divergence_guard(const ConvergenceReport& report, double diagonal,
                             double divergence_factor, std::span<const Vec3> positions) {
    if (report.records.empty())
        throw ValidationError("divergence_guard requires at least one recorded iteration");
    if (report.records.back().max_displacement > divergence_factor * diagonal) return true;
    for (const Vec3& p : positions)
        if (!finite(p)) return true;
    return false;
}

// Runs the relaxation to a verdict. Emits a frame every frame_stride
// iterations plus the final state.
inline RunResult run(const ObjectModel& model_a, const ObjectModel& model_b,
                     const SolverConfig& cfg, const DetectParams& detect_params = {}) {
    validate_config(cfg);
    validate(model_a);
    validate(model_b);

    RunResult result;
    std::tie(result.eps1, result.eps2) = resolve_thresholds(cfg, model_a, model_b);
    const double diagonal = scene_diagonal(model_a, model_b);

    Network net = build_network(model_a, model_b);
    const std::size_t count_a = net.count_a;
    DetectFn detect_fn = [&](std::span<const Vec3> pos) {
        return detect(pos.first(count_a), pos.subspan(count_a), model_a, model_b, detect_params);
    };

    NetworkState state = init_state(net, detect_fn);
    std::vector<Vec3> previous = net.rest;  // for the displacement of row 0

    int last_frame_iteration = -1;
    auto emit_frame = [&](int iteration) {
        result.frames.push_back(Frame{iteration, state.chi1});
        last_frame_iteration = iteration;
    };

    for (int t = 0;; ++t) {
        const std::vector<Vec3> signals = update_internal_signals(state, net);
        const ExternalEdgeSet externals = update_external_signals(state, net, signals);
        const std::vector<Vec3> forces = net_forces(state, net, signals, externals);

        IterationRecord rec;
        rec.iteration = t;
        rec.max_penetration = max_penetration_offset(state.chi1, state.chi2);
        rec.max_force_residual = max_mobile_force(net, forces);
        double disp = 0.0;
        for (std::size_t v = 0; v < net.vertex_count(); ++v)
            disp = std::max(disp, (state.chi1[v] - previous[v]).norm());
        rec.max_displacement = disp;
        result.report.records.push_back(rec);
        if (t % cfg.frame_stride == 0) emit_frame(t);

        if (rec.max_penetration < result.eps1 && rec.max_force_residual < result.eps2) {
            result.report.verdict = Verdict::converged;
            result.report.final_iteration = t;
            break;
        }
        if (divergence_guard(result.report, diagonal, cfg.divergence_factor, state.chi1)) {
            result.report.verdict = Verdict::diverged;
            result.report.final_iteration = t;
            break;
        }
        if (t >= cfg.max_iterations) {
            result.report.verdict = Verdict::max_iterations_reached;
            result.report.final_iteration = t;
            break;
        }

        const double a = alpha(cfg.gamma, cfg.beta, state.update_count);
        previous = state.chi1;
        std::vector<Vec3> stepped = step_force(state, net, forces, a);
        bool all_finite = true;
        for (const Vec3& p : stepped)
            if (!finite(p)) {
                all_finite = false;
                break;
            }
        if (!all_finite) {
            // Forces overflowed; keep the last finite state as the outcome so
            // no NaN/inf can reach an output file.
            result.report.verdict = Verdict::diverged;
            result.report.final_iteration = t;
            break;
        }

        const Correspondence fresh = detect_fn(stepped);
        state.chi1 = penetration_correction(net, stepped, fresh);
        state.chi2 = fresh;
        state.update_count += 1;
    }

    if (last_frame_iteration != result.report.final_iteration)
        emit_frame(result.report.final_iteration);
    result.final_positions = state.chi1;
    result.final_correspondence = state.chi2;
    return result;
}

}  // namespace deform
