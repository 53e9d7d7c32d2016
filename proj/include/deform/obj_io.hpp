// obj_io.hpp — reader/writer for the OBJ subset used by this project.
//
// Input: `v x y z` and `f i j k [l ...]` records with 1-based indices.
// Faces with more than three vertices are fan-triangulated. Normals,
// texture coordinates and grouping statements are skipped; negative
// (relative) face indices are rejected. Output emits `v %.9g %.9g %.9g`
// and exactly triangular `f` records.
#pragma once

#include "deform/core.hpp"
#include "deform/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace deform {

inline ObjectModel load_obj(std::istream& in) {
    std::vector<Vec3> positions;
    std::vector<Triangle> triangles;
    std::string line;
    int line_no = 0;

    auto fail = [&](const std::string& what) {
        throw ParseError("obj parse error at line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;  // blank line
        if (tag[0] == '#') continue;

        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z)) fail("expected three coordinates after 'v'");
            std::string extra;
            if (ls >> extra) fail("unexpected token '" + extra + "' after vertex coordinates");
            if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
                fail("non-finite vertex coordinate");
            positions.emplace_back(x, y, z);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string tok;
            while (ls >> tok) {
                // Accept `i`, `i/t`, `i/t/n`, `i//n`; only the vertex index is used.
                const std::string head = tok.substr(0, tok.find('/'));
                std::size_t used = 0;
                long v = 0;
                try {
                    v = std::stol(head, &used);
                } catch (const std::exception&) {
                    fail("bad face index '" + tok + "'");
                }
                if (used != head.size()) fail("bad face index '" + tok + "'");
                if (v < 0) fail("negative face indices are not supported");
                if (v == 0) fail("face indices are 1-based; 0 is invalid");
                idx.push_back(v);
            }
            if (idx.size() < 3) fail("face needs at least three vertices");
            for (long v : idx)
                if (v > static_cast<long>(positions.size()))
                    throw ValidationError("obj validation error at line " + std::to_string(line_no) +
                                          ": face index " + std::to_string(v) +
                                          " out of range (only " + std::to_string(positions.size()) +
                                          " vertices so far)");
            for (std::size_t i = 1; i + 1 < idx.size(); ++i)
                triangles.push_back(Triangle{static_cast<VertexId>(idx[0] - 1),
                                             static_cast<VertexId>(idx[i] - 1),
                                             static_cast<VertexId>(idx[i + 1] - 1)});
        } else if (tag == "vn" || tag == "vt" || tag == "vp" || tag == "o" || tag == "g" ||
                   tag == "s" || tag == "usemtl" || tag == "mtllib" || tag == "l") {
            continue;  // ignored OBJ furniture
        } else {
            fail("unrecognized record '" + tag + "'");
        }
    }
    return make_object(std::move(positions), std::move(triangles));
}

inline ObjectModel load_obj_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open obj file: " + path);
    try {
        return load_obj(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

// Writes the model's surface at the given positions. `positions` may cover
// interior points as well (they follow the surface block); interior points
// are emitted as trailing `v` lines only when requested and never appear in
// faces.
inline void save_obj(std::ostream& out, const std::vector<Vec3>& positions,
                     const ObjectModel& model, bool include_interior = false) {
    if (positions.size() < model.surface_vertex_count)
        throw ValidationError("position list shorter than surface vertex count");
    if (include_interior && positions.size() < model.vertex_count())
        throw ValidationError("position list shorter than vertex count (interior requested)");

    const std::size_t count = include_interior ? model.vertex_count() : model.surface_vertex_count;
    char buf[96];
    for (std::size_t i = 0; i < count; ++i) {
        const Vec3& p = positions[i];
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    for (const Triangle& t : model.triangles) {
        std::snprintf(buf, sizeof buf, "f %d %d %d\n", t.a + 1, t.b + 1, t.c + 1);
        out << buf;
    }
}

inline void save_obj_file(const std::string& path, const std::vector<Vec3>& positions,
                          const ObjectModel& model, bool include_interior = false) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    save_obj(out, positions, model, include_interior);
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace deform
