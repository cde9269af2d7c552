// mesh.hpp — triangle mesh with a UV atlas and derived vertex normals.
//
// Faces are triangles only; each corner carries a position index and a UV
// index (the atlas may split vertices along seams, so the two index spaces
// are independent). Normals are always derived from geometry, never ingested.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "uvbake/vec.hpp"

namespace uvbake {

struct FaceCorner {
    std::int32_t position = 0;  // index into Mesh::positions
    std::int32_t uv = 0;        // index into Mesh::uvs
};

using Face = std::array<FaceCorner, 3>;

struct Mesh {
    std::vector<Vec3> positions;       // scene units
    std::vector<Vec2> uvs;             // [0,1]^2
    std::vector<Face> faces;
    std::vector<Vec3> vertex_normals;  // unit, derived; parallel to positions

    size_t face_count() const { return faces.size(); }
    size_t vertex_count() const { return positions.size(); }
};

// Unnormalized face normal; its magnitude is twice the face area, which makes
// summing these the area-weighted accumulation used for vertex normals.
inline Vec3 face_normal_scaled(const Mesh& mesh, size_t face) {
    const Face& f = mesh.faces[face];
    const Vec3& a = mesh.positions[f[0].position];
    const Vec3& b = mesh.positions[f[1].position];
    const Vec3& c = mesh.positions[f[2].position];
    return cross(b - a, c - a);
}

struct VertexNormalsResult {
    std::vector<Vec3> normals;
    int degenerate_vertices = 0;  // vertices whose incident faces all had zero area
};

// Area-weighted vertex normals. Degenerate faces contribute nothing; a vertex
// left with no accumulated direction gets (0,0,1) and bumps the warning count.
inline VertexNormalsResult compute_vertex_normals(const Mesh& mesh) {
    if (mesh.faces.empty()) throw Error("compute_vertex_normals: mesh has no faces");
    std::vector<Vec3> acc(mesh.positions.size(), Vec3{});
    for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        const Vec3 n = face_normal_scaled(mesh, fi);
        if (norm(n) <= kDegenerateArea) continue;
        for (const FaceCorner& corner : mesh.faces[fi]) acc[corner.position] += n;
    }
    VertexNormalsResult result;
    result.normals.resize(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) {
        const double len = norm(acc[i]);
        if (len <= kDegenerateArea) {
            result.normals[i] = {0.0, 0.0, 1.0};
            ++result.degenerate_vertices;
        } else {
            result.normals[i] = {acc[i].x / len, acc[i].y / len, acc[i].z / len};
        }
    }
    return result;
}

}  // namespace uvbake
