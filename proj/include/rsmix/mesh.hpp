#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rsmix/geometry.hpp"
#include "rsmix/random.hpp"

namespace rsmix {

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
};

// OFF text, including the "OFF<nv> <nf> <ne>" header variant found in
// ModelNet. Polygons are fan-triangulated around their first vertex, so the
// face count may exceed the header's. '#' starts a comment. Errors carry
// the 1-based line number.
TriangleMesh parse_off(std::string_view text);

double triangle_area(const Point3& a, const Point3& b, const Point3& c);

// Area-weighted uniform surface sampling. Per point: one draw picks the face
// (u * total area located in the cumulative area table), two more place the
// point with barycentric weights (1 - sqrt(r1), sqrt(r1)(1 - r2), sqrt(r1) r2).
// Zero-area faces are never picked.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, RandomStream& rng);

// Surface sampling followed by unit-sphere normalization.
PointCloud preprocess_mesh(const TriangleMesh& mesh, std::size_t n, RandomStream& rng);

} // namespace rsmix
