// obj_io.hpp — Wavefront OBJ ingestion.
//
// Accepts ASCII OBJ with `v`, `vt`, `vn` and `f` records. Face corners must
// use `pos/uv` or `pos/uv/normal` syntax (the atlas is mandatory); normals in
// the file are ignored and re-derived. Triangles pass through, quads are
// fan-triangulated, anything larger is rejected. Indices are 1-based and may
// reference records that appear later in the file.
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "uvbake/mesh.hpp"

namespace uvbake {

namespace detail {

inline Error obj_error(const std::string& path, int line, const std::string& what) {
    return Error("obj: " + path + ":" + std::to_string(line) + ": " + what);
}

// Parses one face corner token ("3/7" or "3/7/2"). Returns 0-based indices.
inline FaceCorner parse_corner(const std::string& token, const std::string& path, int line) {
    const auto first = token.find('/');
    if (first == std::string::npos)
        throw obj_error(path, line, "face corner '" + token + "' lacks a UV index");
    const auto second = token.find('/', first + 1);
    const std::string pos_str = token.substr(0, first);
    const std::string uv_str = second == std::string::npos
                                   ? token.substr(first + 1)
                                   : token.substr(first + 1, second - first - 1);
    if (uv_str.empty())
        throw obj_error(path, line, "face corner '" + token + "' lacks a UV index");
    try {
        const long pos = std::stol(pos_str);
        const long uv = std::stol(uv_str);
        if (pos < 1 || uv < 1)
            throw obj_error(path, line, "index out of range in corner '" + token + "'");
        return {static_cast<std::int32_t>(pos - 1), static_cast<std::int32_t>(uv - 1)};
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        throw obj_error(path, line, "malformed face corner '" + token + "'");
    }
}

}  // namespace detail

// Loads a mesh and derives its vertex normals. Every violation is reported
// with the offending line number.
inline Mesh load_mesh(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw Error("obj: file not found: " + path);

    Mesh mesh;
    std::vector<int> face_lines;  // source line per triangle, for late checks
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ss >> p.x >> p.y >> p.z))
                throw detail::obj_error(path, line_no, "malformed vertex record");
            mesh.positions.push_back(p);
        } else if (tag == "vt") {
            Vec2 uv;
            if (!(ss >> uv.x >> uv.y))
                throw detail::obj_error(path, line_no, "malformed texture coordinate record");
            if (uv.x < 0.0 || uv.x > 1.0 || uv.y < 0.0 || uv.y > 1.0)
                throw detail::obj_error(path, line_no, "UV outside [0,1]^2 (wrap-around atlases are rejected)");
            mesh.uvs.push_back(uv);
        } else if (tag == "f") {
            std::vector<FaceCorner> corners;
            std::string token;
            while (ss >> token) corners.push_back(detail::parse_corner(token, path, line_no));
            if (corners.size() == 3) {
                mesh.faces.push_back({corners[0], corners[1], corners[2]});
                face_lines.push_back(line_no);
            } else if (corners.size() == 4) {
                mesh.faces.push_back({corners[0], corners[1], corners[2]});
                mesh.faces.push_back({corners[0], corners[2], corners[3]});
                face_lines.push_back(line_no);
                face_lines.push_back(line_no);
            } else {
                throw detail::obj_error(path, line_no,
                                        "unsupported polygon with " + std::to_string(corners.size()) +
                                            " corners (triangles and quads only)");
            }
        }
        // vn, usemtl, o, g, s, mtllib and other records carry nothing we need.
    }

    for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        for (const FaceCorner& c : mesh.faces[fi]) {
            if (c.position >= static_cast<std::int32_t>(mesh.positions.size()))
                throw detail::obj_error(path, face_lines[fi], "position index out of range");
            if (c.uv >= static_cast<std::int32_t>(mesh.uvs.size()))
                throw detail::obj_error(path, face_lines[fi], "UV index out of range");
        }
    }
    if (!mesh.faces.empty())
        mesh.vertex_normals = compute_vertex_normals(mesh).normals;
    return mesh;
}

}  // namespace uvbake
