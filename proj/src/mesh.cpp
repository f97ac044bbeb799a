#include "rsmix/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsmix/error.hpp"
#include "rsmix/rsmix.hpp"
#include "text_util.hpp"

namespace rsmix {

TriangleMesh parse_off(std::string_view text) {
  using detail::parse_error;
  constexpr std::string_view kWhat = "OFF";

  const std::vector<detail::Line> lines = detail::tokenize_lines(text, '#');
  if (lines.empty()) {
    throw Error(ErrorCode::EmptyInput, "empty input");
  }

  std::size_t cursor = 0;
  const detail::Line& header = lines[cursor++];
  std::string_view magic = header.tokens[0];
  if (magic.substr(0, 3) != "OFF") {
    parse_error(kWhat, header.number, "missing OFF header");
  }

  // Counts may share the header line ("OFF 8 6 0"), be glued to it
  // ("OFF8 6 0"), or sit on the next line.
  std::vector<std::string_view> counts;
  std::size_t counts_line = header.number;
  if (magic.size() > 3) {
    counts.push_back(magic.substr(3));
  }
  counts.insert(counts.end(), header.tokens.begin() + 1, header.tokens.end());
  if (counts.empty()) {
    if (cursor == lines.size()) {
      parse_error(kWhat, header.number, "missing vertex/face counts");
    }
    counts = lines[cursor].tokens;
    counts_line = lines[cursor].number;
    ++cursor;
  }
  if (counts.size() < 2) {
    parse_error(kWhat, counts_line, "expected vertex and face counts");
  }
  const auto num_vertices = detail::to_uint(counts[0]);
  const auto num_faces = detail::to_uint(counts[1]);
  if (!num_vertices || !num_faces) {
    parse_error(kWhat, counts_line, "invalid vertex/face counts");
  }
  const std::size_t remaining = lines.size() - cursor;
  if (*num_vertices > remaining || *num_faces > remaining - *num_vertices) {
    throw Error(ErrorCode::Parse, "OFF: unexpected end of file: header declares " +
                                      std::to_string(*num_vertices) + " vertices and " +
                                      std::to_string(*num_faces) + " faces");
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(*num_vertices);
  for (std::uint64_t v = 0; v < *num_vertices; ++v) {
    const detail::Line& line = lines[cursor++];
    if (line.tokens.size() < 3) {
      parse_error(kWhat, line.number, "vertex needs 3 coordinates");
    }
    Point3 p;
    double* coords[3] = {&p.x, &p.y, &p.z};
    for (int a = 0; a < 3; ++a) {
      const auto value = detail::to_double(line.tokens[a]);
      if (!value || !std::isfinite(*value)) {
        parse_error(kWhat, line.number, "invalid coordinate '" + std::string(line.tokens[a]) + "'");
      }
      *coords[a] = *value;
    }
    mesh.vertices.push_back(p);
  }

  mesh.faces.reserve(*num_faces);
  for (std::uint64_t f = 0; f < *num_faces; ++f) {
    const detail::Line& line = lines[cursor++];
    const auto arity = detail::to_uint(line.tokens[0]);
    if (!arity) {
      parse_error(kWhat, line.number, "invalid face vertex count");
    }
    if (*arity < 3) {
      parse_error(kWhat, line.number, "face needs at least 3 vertices");
    }
    if (line.tokens.size() - 1 < *arity) {
      parse_error(kWhat, line.number, "face lists fewer indices than declared");
    }
    std::vector<std::uint32_t> polygon;
    polygon.reserve(*arity);
    for (std::uint64_t i = 0; i < *arity; ++i) {
      const auto index = detail::to_uint(line.tokens[1 + i]);
      if (!index) {
        parse_error(kWhat, line.number, "invalid vertex index '" + std::string(line.tokens[1 + i]) + "'");
      }
      if (*index >= mesh.vertices.size()) {
        parse_error(kWhat, line.number,
                    "vertex index " + std::to_string(*index) + " out of range (" +
                        std::to_string(mesh.vertices.size()) + " vertices)");
      }
      polygon.push_back(static_cast<std::uint32_t>(*index));
    }
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
      mesh.faces.push_back({polygon[0], polygon[i], polygon[i + 1]});
    }
  }
  return mesh;
}

double triangle_area(const Point3& a, const Point3& b, const Point3& c) {
  const Point3 u = b - a;
  const Point3 v = c - a;
  const Point3 cross{u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
  return 0.5 * norm(cross);
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, RandomStream& rng) {
  if (n == 0) {
    throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  }
  std::vector<double> cumulative;
  cumulative.reserve(mesh.faces.size());
  double total = 0.0;
  for (const auto& face : mesh.faces) {
    for (std::uint32_t v : face) {
      if (v >= mesh.vertices.size()) {
        throw Error(ErrorCode::InvalidArgument, "face index out of range");
      }
    }
    const double area = triangle_area(mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]);
    if (!std::isfinite(area)) {
      throw Error(ErrorCode::InvalidArgument, "non-finite face area");
    }
    total += area;
    cumulative.push_back(total);
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "degenerate mesh: zero total surface area");
  }

  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = rng.uniform01() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) {
      --it; // rounding at the top of the table
      while (it != cumulative.begin() && *it == *(it - 1)) {
        --it;
      }
    }
    const auto& face = mesh.faces[static_cast<std::size_t>(it - cumulative.begin())];
    const double s = std::sqrt(rng.uniform01());
    const double r2 = rng.uniform01();
    const Point3& a = mesh.vertices[face[0]];
    const Point3& b = mesh.vertices[face[1]];
    const Point3& c = mesh.vertices[face[2]];
    cloud.points.push_back((1.0 - s) * a + (s * (1.0 - r2)) * b + (s * r2) * c);
  }
  return cloud;
}

PointCloud preprocess_mesh(const TriangleMesh& mesh, std::size_t n, RandomStream& rng) {
  return normalize_unit_sphere(sample_mesh_surface(mesh, n, rng));
}

} // namespace rsmix
