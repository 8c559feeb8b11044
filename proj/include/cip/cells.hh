#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cip/cell_table.hh"
#include "cip/field.hh"
#include "cip/patch.hh"

namespace cip {

using CellIndex = std::array<int, 3>;

// Regular grid of dims[0] x dims[1] x dims[2] cubes of side `spacing`.
struct GridSpec {
  Point3 origin = Point3::Zero();
  double spacing = 1;
  std::array<int, 3> dims{1, 1, 1};

  void validate() const;
  // Every grid coordinate is computed by this one expression, so cells
  // sharing a face see bitwise-identical face coordinates.
  double coord(int axis, int index) const { return origin[axis] + spacing * index; }
  Point3 vertex(const std::array<int, 3> &index) const;
  Box cell_box(const CellIndex &cell) const;
  std::size_t vertex_count() const;
};

// A grid edge: starts at `start` and runs one step along `axis`.
struct EdgeKey {
  int axis = 0;
  std::array<int, 3> start{0, 0, 0};
  auto operator<=>(const EdgeKey &) const = default;
};

EdgeKey global_edge(const CellIndex &cell, int local_edge);

struct HermiteSample {
  EdgeKey edge;
  Point3 position;
  Vec3 normal; // unit, pointing towards the positive side of the source
};

// Per-vertex samples and per-edge Hermite data of a source field. Built once,
// then read-only.
struct GridSamples {
  GridSpec grid;
  std::vector<double> values; // x fastest
  std::map<EdgeKey, HermiteSample> hermite;

  std::size_t vertex_slot(const std::array<int, 3> &index) const;
  double value(const std::array<int, 3> &index) const { return values[vertex_slot(index)]; }
  bool negative(const std::array<int, 3> &index) const { return value(index) < 0; }
  std::uint8_t cell_mask(const CellIndex &cell) const;
};

// Vertex values (exact zeros replaced by +1e-10 * spacing) and, on every
// sign-changing edge, the crossing found by bisection to 1e-10 of the edge
// length with the normalized source gradient there. Throws GridError when the
// gradient vanishes at a crossing.
GridSamples sample_grid(const Field &source, const GridSpec &grid);

// One corner patch per boundary loop of the cell.
struct CellPatch {
  CellIndex cell{0, 0, 0};
  CellConfig config;
  std::vector<CornerPatch> patches; // patches[k] belongs to config.loops[k]
};

// Face plane of a cell, negative inside the cell.
Plane face_plane(const GridSpec &grid, const CellIndex &cell, int face);

// Tangent plane of a Hermite sample, oriented negative at the negative
// endpoint of its edge.
Plane corner_plane(const GridSamples &samples, const HermiteSample &sample);

// Bounds are the loop's face planes, corners the Hermite tangent planes; each
// side weight interpolates the midpoint of that side's two crossings and the
// interior weight is 0. Throws GridError on degenerate Hermite data.
CellPatch build_cell_patch(const CellConfig &config, const GridSamples &samples, const CellIndex &cell);

struct ContinuityReport {
  bool pass = true;
  bool vacuous = false;   // no loop crosses the shared face
  bool matched = true;    // every crossing loop found its partner across the face
  double max_value = 0;   // max |b| at zero crossings of a on the face
  double max_angle = 0;   // max angle between grad a and grad b there
  std::size_t roots = 0;
};

constexpr double kContinuityValueTol = 1e-8;
constexpr double kContinuityAngleTol = 1e-5;

// Samples zero crossings of each of a's patches on the face shared with b and
// evaluates b's matching patch there. Throws InvalidArgument if the cells are
// not face-adjacent.
ContinuityReport check_continuity(const CellPatch &a, const CellPatch &b, const GridSpec &grid);

struct CellComplex {
  GridSpec grid;
  std::vector<CellPatch> cells; // nonempty cells in x-fastest scan order
};

CellComplex build_complex(const Field &source, const GridSpec &grid);

// Index pairs (i, j), i before j, of face-adjacent cells in the complex.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_cells(const CellComplex &complex);

// The face of cell `a` shared with cell `b`, if they are face neighbours.
std::optional<int> shared_face(const CellIndex &a, const CellIndex &b);

} // namespace cip
