#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "cip/field.hh"

namespace cip {

// Grid edge on the boundary of the polygonized box. A vertex on a rail only
// moves along it, which keeps meshes of neighbouring boxes stitched.
struct VertexRail {
  Point3 from, to;
};

struct Mesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<std::optional<VertexRail>> rails; // parallel to vertices

  bool empty() const { return triangles.empty(); }
  // Throws InvalidArgument on out-of-range indices or triangles of area < 1e-14.
  void validate() const;
};

constexpr double kMinTriangleArea = 1e-14;

double triangle_area(const Point3 &a, const Point3 &b, const Point3 &c);

// Marching cubes over resolution^3 subcells of the box, using the same loop
// topology as classify_cell; loops are fan-triangulated with normals towards
// the positive side. Crossings are linearly interpolated. Components smaller
// than two subcells that do not reach the box boundary are dropped.
Mesh polygonize(const Field &field, const Box &box, int resolution);

struct Projection {
  Mesh mesh;
  std::vector<std::size_t> unconverged; // vertex indices
  double max_residual = 0;              // max |field| over converged vertices
};

// Damped Newton steps v <- v - f grad f / |grad f|^2 for free vertices; rail
// vertices are solved along their rail by safeguarded secant iteration.
Projection project_to_surface(const Mesh &mesh, const Field &field, int iterations);

Mesh merge_meshes(const std::vector<Mesh> &meshes);

// Wavefront OBJ: a header comment, "v x y z" lines, then 1-based "f i j k" lines.
void write_obj(const Mesh &mesh, std::ostream &os);
void export_obj(const Mesh &mesh, const std::filesystem::path &path);

} // namespace cip
