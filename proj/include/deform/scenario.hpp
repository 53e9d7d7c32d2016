// scenario.hpp — scene setup: mesh generators, config files, run pipeline.
//
// A scenario is two prepared objects (materials, interior points, internal
// edges, fixed regions, external forces) plus detection and solver settings.
// Scenarios come from a line-oriented `key = value` config file or from the
// built-in sphere-cube preset: a 1026-vertex/2048-triangle sphere of radius
// 45 penetrating a 1538-vertex/3072-triangle cube of edge 90 by 17% of the
// sphere's diameter, upper half of the cube and lower half of the sphere
// held fixed, radial correspondence from the sphere center.
#pragma once

#include "deform/collision.hpp"
#include "deform/core.hpp"
#include "deform/interior.hpp"
#include "deform/mesh.hpp"
#include "deform/network.hpp"
#include "deform/obj_io.hpp"
#include "deform/solver.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace deform {

// ---------------------------------------------------------------------------
// Mesh generators
// ---------------------------------------------------------------------------

// UV sphere: `segments` around the axis, `rings` latitude rings between the
// poles. Vertex count = segments*rings + 2, triangle count = 2*segments*rings.
inline ObjectModel make_uv_sphere(const Vec3& center, double radius, int segments, int rings) {
    if (segments < 3 || rings < 1) throw ValidationError("uv sphere needs segments >= 3, rings >= 1");
    std::vector<Vec3> pos;
    pos.reserve(static_cast<std::size_t>(segments) * rings + 2);
    pos.push_back(center + Vec3(0, 0, radius));  // north pole, index 0
    const double pi = 3.14159265358979323846;
    for (int i = 1; i <= rings; ++i) {
        const double theta = pi * i / (rings + 1);
        const double z = std::cos(theta), s = std::sin(theta);
        for (int j = 0; j < segments; ++j) {
            const double phi = 2.0 * pi * j / segments;
            pos.push_back(center + radius * Vec3(s * std::cos(phi), s * std::sin(phi), z));
        }
    }
    pos.push_back(center + Vec3(0, 0, -radius));  // south pole
    const VertexId south = static_cast<VertexId>(pos.size() - 1);
    auto ring_v = [segments](int i, int j) {
        return static_cast<VertexId>(1 + (i - 1) * segments + (j % segments));
    };

    std::vector<Triangle> tris;
    tris.reserve(2u * segments * rings);
    for (int j = 0; j < segments; ++j)
        tris.push_back({0, ring_v(1, j), ring_v(1, j + 1)});
    for (int i = 1; i < rings; ++i)
        for (int j = 0; j < segments; ++j) {
            tris.push_back({ring_v(i, j), ring_v(i + 1, j), ring_v(i + 1, j + 1)});
            tris.push_back({ring_v(i, j), ring_v(i + 1, j + 1), ring_v(i, j + 1)});
        }
    for (int j = 0; j < segments; ++j)
        tris.push_back({south, ring_v(rings, j + 1), ring_v(rings, j)});
    return make_object(std::move(pos), std::move(tris));
}

// Cube with `divisions` x `divisions` quads per face, faces welded along the
// shared edges. Vertex count = 6*divisions^2 + 2, triangles = 12*divisions^2.
inline ObjectModel make_grid_cube(const Vec3& center, double edge, int divisions) {
    if (divisions < 1) throw ValidationError("grid cube needs at least one division");
    const int n = divisions;
    const double step = edge / n;
    const Vec3 corner = center - 0.5 * edge * Vec3(1, 1, 1);

    std::map<std::array<int, 3>, VertexId> index;  // integer lattice key -> vertex
    std::vector<Vec3> pos;
    auto vertex = [&](std::array<int, 3> g) {
        auto [it, inserted] = index.try_emplace(g, static_cast<VertexId>(pos.size()));
        if (inserted) pos.push_back(corner + step * Vec3(g[0], g[1], g[2]));
        return it->second;
    };

    // Each face: lattice origin plus two integer direction vectors chosen so
    // du x dv points outward, giving a coherent orientation for the whole
    // surface.
    struct Face {
        std::array<int, 3> origin, du, dv;
    };
    const std::array<Face, 6> faces = {{
        {{n, 0, 0}, {0, 1, 0}, {0, 0, 1}},  // +x
        {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}},  // -x
        {{0, n, 0}, {0, 0, 1}, {1, 0, 0}},  // +y
        {{0, 0, 0}, {1, 0, 0}, {0, 0, 1}},  // -y
        {{0, 0, n}, {1, 0, 0}, {0, 1, 0}},  // +z
        {{0, 0, 0}, {0, 1, 0}, {1, 0, 0}},  // -z
    }};

    std::vector<Triangle> tris;
    tris.reserve(12u * n * n);
    for (const Face& f : faces) {
        auto at = [&](int i, int j) {
            return vertex({f.origin[0] + i * f.du[0] + j * f.dv[0],
                           f.origin[1] + i * f.du[1] + j * f.dv[1],
                           f.origin[2] + i * f.du[2] + j * f.dv[2]});
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const VertexId p00 = at(i, j), p10 = at(i + 1, j);
                const VertexId p01 = at(i, j + 1), p11 = at(i + 1, j + 1);
                tris.push_back({p00, p10, p11});
                tris.push_back({p00, p11, p01});
            }
    }
    return make_object(std::move(pos), std::move(tris));
}

// ---------------------------------------------------------------------------
// Fixed regions
// ---------------------------------------------------------------------------

// Axis-aligned half space: sign +1 fixes vertices with coord >= offset,
// sign -1 fixes vertices with coord <= offset.
struct FixedRegion {
    int axis = 2;
    int sign = +1;
    double offset = 0.0;
};

// Sets Status 0 on every vertex (surface and interior) inside the region;
// everything else keeps its current status.
inline ObjectModel apply_fixed_region(const ObjectModel& model, const FixedRegion& region) {
    if (region.axis < 0 || region.axis > 2 || (region.sign != 1 && region.sign != -1))
        throw ValidationError("malformed fixed region");
    ObjectModel out = model;
    for (std::size_t i = 0; i < out.vertex_count(); ++i) {
        const double c = out.rest_positions[i][region.axis];
        const bool inside = region.sign > 0 ? c >= region.offset : c <= region.offset;
        if (inside) out.mobility[i] = 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

struct ObjectSpec {
    std::string path;
    double k = 1.0;
    double h = 0.0;
    std::optional<FixedRegion> fixed_region;
    std::optional<double> interior_spacing;
    // Distance threshold for interior-touching edges. The default is just
    // above the lattice pitch: enough to connect the lattice to itself and
    // to nearby surface vertices without fanning out across the surface
    // (high-degree hubs violate the damping stability bound).
    std::optional<double> edge_threshold;  // default 1.05 * interior_spacing
};

struct ScenarioConfig {
    ObjectSpec a, b;
    DetectMode detect_mode = DetectMode::nearest;
    std::optional<Vec3> radial_center;
    Vec3 gravity = Vec3::Zero();
    SolverConfig solver;
    std::string output_dir = "out";
    std::string base_dir = ".";  // object paths resolve relative to this
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& value, int line) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "': expected a real number, got '" + value + "'");
    return v;
}

inline long parse_int(const std::string& key, const std::string& value, int line) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size())
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "': expected an integer, got '" + value + "'");
    return v;
}

inline Vec3 parse_vec3(const std::string& key, const std::string& value, int line) {
    std::istringstream ss(value);
    double x, y, z;
    std::string extra;
    if (!(ss >> x >> y >> z) || (ss >> extra))
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "': expected three reals, got '" + value + "'");
    return Vec3(x, y, z);
}

inline FixedRegion parse_fixed_region(const std::string& key, const std::string& value, int line) {
    std::istringstream ss(value);
    std::string axis, op;
    double offset;
    std::string extra;
    if (!(ss >> axis >> op >> offset) || (ss >> extra) ||
        axis.size() != 1 || (axis[0] != 'x' && axis[0] != 'y' && axis[0] != 'z') ||
        (op != ">=" && op != "<="))
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "': expected '<axis> >= <offset>' or '<axis> <= <offset>', got '" +
                          value + "'");
    return FixedRegion{axis[0] - 'x', op == ">=" ? +1 : -1, offset};
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// Parses the flat `key = value` scenario format. `#` starts a comment, blank
// lines are skipped, per-object keys carry an `a.` or `b.` prefix. Unknown
// keys, malformed values, out-of-range values and missing required keys are
// ConfigErrors naming the key and line.
inline ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int line_no = 0;
    bool saw_a = false, saw_b = false;

    auto bad = [&](const std::string& key, const std::string& why) {
        throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key + "': " + why);
    };

    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = detail::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + text + "'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + text + "'");

        ObjectSpec* obj = nullptr;
        std::string field = key;
        if (key.rfind("a.", 0) == 0) {
            obj = &cfg.a;
            field = key.substr(2);
        } else if (key.rfind("b.", 0) == 0) {
            obj = &cfg.b;
            field = key.substr(2);
        }

        if (obj != nullptr) {
            if (field == "k") {
                obj->k = detail::parse_real(key, value, line_no);
                if (!(obj->k > 0.0)) bad(key, "stiffness k must be positive");
            } else if (field == "h") {
                obj->h = detail::parse_real(key, value, line_no);
                if (std::abs(1.0 - obj->h - 2.0 * obj->h * obj->h) <= 1e-12)
                    bad(key, "h makes the material singular (h = 0.5 or h = -1)");
            } else if (field == "fixed_region") {
                if (value != "none") obj->fixed_region = detail::parse_fixed_region(key, value, line_no);
            } else if (field == "interior_spacing") {
                if (value != "none") {
                    const double s = detail::parse_real(key, value, line_no);
                    if (!(s > 0.0)) bad(key, "interior spacing must be positive");
                    obj->interior_spacing = s;
                }
            } else if (field == "edge_threshold") {
                const double t = detail::parse_real(key, value, line_no);
                if (!(t > 0.0)) bad(key, "edge threshold must be positive");
                obj->edge_threshold = t;
            } else {
                bad(key, "unknown key");
            }
            continue;
        }

        if (key == "object_a") {
            cfg.a.path = value;
            saw_a = true;
        } else if (key == "object_b") {
            cfg.b.path = value;
            saw_b = true;
        } else if (key == "detect_mode") {
            if (value == "nearest")
                cfg.detect_mode = DetectMode::nearest;
            else if (value == "radial")
                cfg.detect_mode = DetectMode::radial;
            else
                bad(key, "expected 'nearest' or 'radial'");
        } else if (key == "radial_center") {
            cfg.radial_center = detail::parse_vec3(key, value, line_no);
        } else if (key == "gravity") {
            cfg.gravity = detail::parse_vec3(key, value, line_no);
        } else if (key == "gamma") {
            cfg.solver.gamma = detail::parse_real(key, value, line_no);
            if (!(cfg.solver.gamma > 0.0 && cfg.solver.gamma < 1.0))
                bad(key, "gamma must lie in (0, 1)");
        } else if (key == "beta") {
            cfg.solver.beta = detail::parse_real(key, value, line_no);
            if (!(cfg.solver.beta >= 0.0 && cfg.solver.beta <= 1.0))
                bad(key, "beta must lie in [0, 1]");
        } else if (key == "eps1") {
            cfg.solver.eps1 = detail::parse_real(key, value, line_no);
            if (!(*cfg.solver.eps1 > 0.0)) bad(key, "eps1 must be positive");
        } else if (key == "eps2") {
            cfg.solver.eps2 = detail::parse_real(key, value, line_no);
            if (!(*cfg.solver.eps2 > 0.0)) bad(key, "eps2 must be positive");
        } else if (key == "max_iterations") {
            const long n = detail::parse_int(key, value, line_no);
            if (n <= 0) bad(key, "max_iterations must be positive");
            cfg.solver.max_iterations = static_cast<int>(n);
        } else if (key == "divergence_factor") {
            cfg.solver.divergence_factor = detail::parse_real(key, value, line_no);
            if (!(cfg.solver.divergence_factor > 1.0)) bad(key, "divergence_factor must exceed 1");
        } else if (key == "frame_stride") {
            const long n = detail::parse_int(key, value, line_no);
            if (n < 1) bad(key, "frame_stride must be at least 1");
            cfg.solver.frame_stride = static_cast<int>(n);
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else {
            bad(key, "unknown key");
        }
    }

    if (!saw_a) throw ConfigError("config: missing required key 'object_a'");
    if (!saw_b) throw ConfigError("config: missing required key 'object_b'");
    if (cfg.detect_mode == DetectMode::radial && !cfg.radial_center)
        throw ConfigError("config: detect_mode = radial requires 'radial_center'");
    for (const ObjectSpec* o : {&cfg.a, &cfg.b})
        if (o->edge_threshold && !o->interior_spacing)
            throw ConfigError("config: edge_threshold requires interior_spacing");
    return cfg;
}

inline ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ScenarioConfig cfg = parse_config(in);
    cfg.base_dir = std::filesystem::path(path).parent_path().string();
    if (cfg.base_dir.empty()) cfg.base_dir = ".";
    return cfg;
}

// ---------------------------------------------------------------------------
// Resolved scenario and pipeline
// ---------------------------------------------------------------------------

struct Scenario {
    ObjectModel a, b;
    DetectParams detect;
    SolverConfig solver;
    std::string output_dir = "out";
};

// Prepares one object: interior lattice, internal edges, fixed region,
// external force.
inline ObjectModel prepare_object(ObjectModel model, const ObjectSpec& spec, const Vec3& gravity) {
    model.stiffness_k = spec.k;
    model.poisson_h = spec.h;
    if (spec.interior_spacing) {
        model = generate_interior_points(model, *spec.interior_spacing).model;
        const double threshold = spec.edge_threshold.value_or(1.05 * *spec.interior_spacing);
        model = build_internal_edges(model, EdgeMode::combined, threshold);
    } else {
        model = build_internal_edges(model, EdgeMode::shared_polygon);
    }
    if (spec.fixed_region) model = apply_fixed_region(model, *spec.fixed_region);
    for (Vec3& f : model.external_force) f = gravity;
    validate(model);
    return model;
}

// Loads OBJ files and resolves the config into a runnable scenario.
inline Scenario load_scenario(const ScenarioConfig& cfg) {
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path.string()
                                  : (std::filesystem::path(cfg.base_dir) / path).string();
    };
    Scenario sc;
    sc.a = prepare_object(load_obj_file(resolve(cfg.a.path)), cfg.a, cfg.gravity);
    sc.b = prepare_object(load_obj_file(resolve(cfg.b.path)), cfg.b, cfg.gravity);
    sc.detect.mode = cfg.detect_mode;
    if (cfg.radial_center) sc.detect.radial_center = *cfg.radial_center;
    sc.solver = cfg.solver;
    sc.output_dir = cfg.output_dir;
    return sc;
}

// Built-in sphere-cube scenario. The sphere sits below the cube and
// penetrates its bottom face by 0.17 * 90 = 15.3 length units; the cube's
// upper half and the sphere's lower half are fixed, as if held by two hands.
// The cube gets an interior lattice so it does not behave like an empty box.
// The sphere stays hollow: around the UV poles the surface vertices cluster
// far tighter than any usable lattice pitch, so every distance threshold
// that connects the lattice to itself also ties pole-cap vertex fans to
// single interior points, whose weighted degree then breaks the gamma = 0.1
// stability bound.
inline Scenario make_paper_preset(double k_ratio = 3.0, double h = 0.0, double gamma = 0.1) {
    constexpr double kRadius = 45.0;
    constexpr double kEdge = 90.0;
    constexpr double kPenetration = 0.17 * 2.0 * kRadius;  // 15.3
    const Vec3 sphere_center(0.0, 0.0, -kEdge / 2.0 - (kRadius - kPenetration));

    ObjectSpec sphere_spec;
    sphere_spec.k = k_ratio;
    sphere_spec.h = h;
    sphere_spec.fixed_region = FixedRegion{2, -1, sphere_center.z()};

    ObjectSpec cube_spec;
    cube_spec.k = 1.0;
    cube_spec.h = h;
    cube_spec.fixed_region = FixedRegion{2, +1, 0.0};
    cube_spec.interior_spacing = 15.0;
    cube_spec.edge_threshold = 15.75;

    Scenario sc;
    sc.a = prepare_object(make_uv_sphere(sphere_center, kRadius, 32, 32), sphere_spec, Vec3::Zero());
    sc.b = prepare_object(make_grid_cube(Vec3::Zero(), kEdge, 16), cube_spec, Vec3::Zero());
    sc.detect.mode = DetectMode::radial;
    sc.detect.radial_center = sphere_center;
    sc.solver.gamma = gamma;
    sc.solver.beta = 0.0;
    return sc;
}

// Runs the solver on a scenario without touching the filesystem.
inline RunResult solve_scenario(const Scenario& sc) {
    return run(sc.a, sc.b, sc.solver, sc.detect);
}

// Writes one combined OBJ: surface of object A then surface of object B.
inline void write_frame_obj(const std::string& path, const Scenario& sc,
                            std::span<const Vec3> positions) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    const std::size_t na = sc.a.vertex_count();
    char buf[96];
    auto emit_vertices = [&](std::span<const Vec3> pos, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) {
            std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", pos[i].x(), pos[i].y(), pos[i].z());
            out << buf;
        }
    };
    emit_vertices(positions.first(na), sc.a.surface_vertex_count);
    emit_vertices(positions.subspan(na), sc.b.surface_vertex_count);
    for (const Triangle& t : sc.a.triangles) {
        std::snprintf(buf, sizeof buf, "f %d %d %d\n", t.a + 1, t.b + 1, t.c + 1);
        out << buf;
    }
    const int off = static_cast<int>(sc.a.surface_vertex_count);
    for (const Triangle& t : sc.b.triangles) {
        std::snprintf(buf, sizeof buf, "f %d %d %d\n", t.a + 1 + off, t.b + 1 + off, t.c + 1 + off);
        out << buf;
    }
    if (!out) throw ParseError("write failed: " + path);
}

inline void write_metrics_csv(const std::string& path, const ConvergenceReport& report) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    out << "iteration,max_penetration,max_force_residual,max_displacement\n";
    char buf[160];
    for (const IterationRecord& r : report.records) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", r.iteration, r.max_penetration,
                      r.max_force_residual, r.max_displacement);
        out << buf;
    }
    if (!out) throw ParseError("write failed: " + path);
}

struct ScenarioOutcome {
    RunResult run;
    std::string output_dir;

    Verdict verdict() const { return run.report.verdict; }
    int exit_code() const {
        switch (run.report.verdict) {
            case Verdict::converged: return 0;
            case Verdict::max_iterations_reached: return 2;
            case Verdict::diverged: return 3;
        }
        return 1;
    }
};

// Runs the scenario and writes frame_%05d.obj per emitted frame, final.obj,
// and metrics.csv into the output directory.
inline ScenarioOutcome run_scenario(const Scenario& sc, const std::string& output_dir_override = "") {
    ScenarioOutcome outcome;
    outcome.output_dir = output_dir_override.empty() ? sc.output_dir : output_dir_override;
    std::filesystem::create_directories(outcome.output_dir);
    outcome.run = solve_scenario(sc);

    const std::filesystem::path dir(outcome.output_dir);
    char name[32];
    for (const Frame& f : outcome.run.frames) {
        std::snprintf(name, sizeof name, "frame_%05d.obj", f.iteration);
        write_frame_obj((dir / name).string(), sc, f.positions);
    }
    write_frame_obj((dir / "final.obj").string(), sc, outcome.run.final_positions);
    write_metrics_csv((dir / "metrics.csv").string(), outcome.run.report);
    return outcome;
}

// Writes the preset's meshes and a config file reproducing it, for running
// the same scene through the --config path.
inline void write_preset_files(const std::string& dir, double k_ratio = 3.0, double h = 0.0,
                               double gamma = 0.1) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    constexpr double kRadius = 45.0;
    constexpr double kEdge = 90.0;
    const Vec3 sphere_center(0.0, 0.0, -kEdge / 2.0 - (kRadius - 0.17 * 2.0 * kRadius));
    const ObjectModel sphere = make_uv_sphere(sphere_center, kRadius, 32, 32);
    const ObjectModel cube = make_grid_cube(Vec3::Zero(), kEdge, 16);
    save_obj_file((base / "sphere_r45.obj").string(), sphere.rest_positions, sphere);
    save_obj_file((base / "cube_e90.obj").string(), cube.rest_positions, cube);

    std::ofstream out(base / "sphere_cube_paper.cfg");
    if (!out) throw ParseError("cannot open output file: " + (base / "sphere_cube_paper.cfg").string());
    char buf[128];
    out << "# Sphere of radius 45 penetrating a cube of edge 90 by 17% of its diameter.\n"
        << "# The cube's upper half and the sphere's lower half are held fixed.\n"
        << "object_a = sphere_r45.obj\n"
        << "object_b = cube_e90.obj\n";
    std::snprintf(buf, sizeof buf, "a.k = %.9g\n", k_ratio);
    out << buf << "a.h = " << h << "\n";
    std::snprintf(buf, sizeof buf, "a.fixed_region = z <= %.9g\n", sphere_center.z());
    out << buf
        << "b.k = 1\n"
        << "b.h = " << h << "\n"
        << "b.fixed_region = z >= 0\n"
        << "b.interior_spacing = 15\n"
        << "b.edge_threshold = 15.75\n"
        << "detect_mode = radial\n";
    std::snprintf(buf, sizeof buf, "radial_center = 0 0 %.9g\n", sphere_center.z());
    out << buf;
    std::snprintf(buf, sizeof buf, "gamma = %.9g\n", gamma);
    out << buf << "beta = 0\n";
}

}  // namespace deform
