#include "cip/cells.hh"

#include <cmath>
#include <set>
#include <string>

#include "cip/errors.hh"
#include "cip/solver.hh"

namespace cip {

namespace {

constexpr double kBisectionTol = 1e-10;
constexpr double kZeroPerturbation = 1e-10;
constexpr double kParallelTol = 1e-6;

std::array<int, 3> add(const std::array<int, 3> &a, const std::array<int, 3> &b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Point3 edge_point(const GridSpec &grid, const EdgeKey &edge, double t) {
  Point3 p = grid.vertex(edge.start);
  p[edge.axis] = grid.coord(edge.axis, edge.start[edge.axis]) + grid.spacing * t;
  return p;
}

std::array<int, 3> edge_end(const EdgeKey &edge) {
  auto end = edge.start;
  ++end[static_cast<std::size_t>(edge.axis)];
  return end;
}

} // namespace

void GridSpec::validate() const {
  if (!(spacing > 0) || !std::isfinite(spacing))
    throw InvalidArgument("grid spacing must be positive");
  for (int d : dims)
    if (d < 1)
      throw InvalidArgument("grid dimensions must be at least 1");
  if (!origin.allFinite())
    throw InvalidArgument("grid origin must be finite");
}

Point3 GridSpec::vertex(const std::array<int, 3> &index) const {
  return Point3(coord(0, index[0]), coord(1, index[1]), coord(2, index[2]));
}

Box GridSpec::cell_box(const CellIndex &cell) const {
  return {vertex(cell), vertex({cell[0] + 1, cell[1] + 1, cell[2] + 1})};
}

std::size_t GridSpec::vertex_count() const {
  return static_cast<std::size_t>(dims[0] + 1) * static_cast<std::size_t>(dims[1] + 1) *
         static_cast<std::size_t>(dims[2] + 1);
}

EdgeKey global_edge(const CellIndex &cell, int local_edge) {
  auto v0 = cube::edge_vertices(local_edge)[0];
  return {cube::edge_axis(local_edge), add(cell, cube::vertex_offset(v0))};
}

std::size_t GridSamples::vertex_slot(const std::array<int, 3> &index) const {
  auto nx = static_cast<std::size_t>(grid.dims[0] + 1), ny = static_cast<std::size_t>(grid.dims[1] + 1);
  return static_cast<std::size_t>(index[0]) +
         nx * (static_cast<std::size_t>(index[1]) + ny * static_cast<std::size_t>(index[2]));
}

std::uint8_t GridSamples::cell_mask(const CellIndex &cell) const {
  std::uint8_t mask = 0;
  for (int v = 0; v < cube::kVertices; ++v)
    if (negative(add(cell, cube::vertex_offset(v))))
      mask = static_cast<std::uint8_t>(mask | (1u << v));
  return mask;
}

GridSamples sample_grid(const Field &source, const GridSpec &grid) {
  grid.validate();
  GridSamples samples;
  samples.grid = grid;
  samples.values.resize(grid.vertex_count());
  for (int k = 0; k <= grid.dims[2]; ++k)
    for (int j = 0; j <= grid.dims[1]; ++j)
      for (int i = 0; i <= grid.dims[0]; ++i) {
        double v = source.value(grid.vertex({i, j, k}));
        if (!std::isfinite(v))
          throw GridError("source field is not finite at a grid vertex");
        if (v == 0)
          v = kZeroPerturbation * grid.spacing;
        samples.values[samples.vertex_slot({i, j, k})] = v;
      }

  for (int k = 0; k <= grid.dims[2]; ++k)
    for (int j = 0; j <= grid.dims[1]; ++j)
      for (int i = 0; i <= grid.dims[0]; ++i)
        for (int axis = 0; axis < 3; ++axis) {
          EdgeKey edge{axis, {i, j, k}};
          auto end = edge_end(edge);
          if (end[static_cast<std::size_t>(axis)] > grid.dims[static_cast<std::size_t>(axis)])
            continue;
          bool start_negative = samples.negative(edge.start);
          if (start_negative == samples.negative(end))
            continue;
          double lo = 0, hi = 1;
          while (hi - lo > kBisectionTol) {
            double mid = (lo + hi) / 2;
            if ((source.value(edge_point(grid, edge, mid)) < 0) == start_negative)
              lo = mid;
            else
              hi = mid;
          }
          Point3 position = edge_point(grid, edge, (lo + hi) / 2);
          Vec3 g = source.gradient(position);
          double len = g.norm();
          if (!std::isfinite(len) || len < 1e-12)
            throw GridError("source gradient vanishes at an edge crossing");
          samples.hermite.emplace(edge, HermiteSample{edge, position, g / len});
        }
  return samples;
}

Plane face_plane(const GridSpec &grid, const CellIndex &cell, int face) {
  int axis = face / 2, side = face % 2;
  double x = grid.coord(axis, cell[static_cast<std::size_t>(axis)] + side);
  Vec3 n = Vec3::Zero();
  if (side == 1) {
    n[axis] = 1;
    return Plane(n, -x);
  }
  n[axis] = -1;
  return Plane(n, x);
}

Plane corner_plane(const GridSamples &samples, const HermiteSample &sample) {
  Plane plane = Plane::through(sample.position, sample.normal);
  auto negative_end = samples.negative(sample.edge.start) ? sample.edge.start : edge_end(sample.edge);
  if (plane.value(samples.grid.vertex(negative_end)) > 0)
    return plane.flipped();
  return plane;
}

CellPatch build_cell_patch(const CellConfig &config, const GridSamples &samples, const CellIndex &cell) {
  CellPatch result{cell, config, {}};
  for (const auto &loop : config.loops) {
    std::size_t n = loop.size();
    std::set<int> faces;
    for (const auto &entry : loop)
      if (!faces.insert(entry.face).second)
        throw GridError("a boundary loop crosses the same cell face twice");

    std::vector<FieldPtr> bounds, corners;
    std::vector<Point3> crossings;
    for (std::size_t i = 0; i < n; ++i) {
      bounds.push_back(std::make_shared<Plane>(face_plane(samples.grid, cell, loop[i].face)));
      auto it = samples.hermite.find(global_edge(cell, loop[i].edge));
      if (it == samples.hermite.end())
        throw GridError("missing Hermite sample on a crossing edge");
      Plane corner = corner_plane(samples, it->second);
      for (int face : {loop[i].face, loop[(i + 1) % n].face})
        if (corner.normal().cross(cube::face_normal(face)).norm() <= kParallelTol)
          throw GridError("Hermite normal is parallel to a cell face; corner plane coincides with a bound");
      corners.push_back(std::make_shared<Plane>(corner));
      crossings.push_back(it->second.position);
    }

    CornerPatch patch(bounds, corners, std::vector<double>(n, 0.0), 0.0);
    std::vector<double> weights(n);
    try {
      for (std::size_t i = 0; i < n; ++i) {
        Point3 target = (crossings[(i + n - 1) % n] + crossings[i]) / 2;
        weights[i] = solve_side_weight(patch, static_cast<std::ptrdiff_t>(i + 1), target);
      }
    } catch (const SolverError &e) {
      throw GridError(std::string("cannot set default side weights: ") + e.what());
    }
    result.patches.push_back(patch.with_weights(std::move(weights), 0.0));
  }
  return result;
}

std::optional<int> shared_face(const CellIndex &a, const CellIndex &b) {
  int axis = -1, delta = 0;
  for (int k = 0; k < 3; ++k) {
    int d = b[static_cast<std::size_t>(k)] - a[static_cast<std::size_t>(k)];
    if (d == 0)
      continue;
    if (axis != -1 || (d != 1 && d != -1))
      return std::nullopt;
    axis = k;
    delta = d;
  }
  if (axis == -1)
    return std::nullopt;
  return 2 * axis + (delta > 0 ? 1 : 0);
}

namespace {

std::set<EdgeKey> face_crossings(const CellIndex &cell, const Loop &loop, int face) {
  std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k)
    if (loop[k].face == face)
      return {global_edge(cell, loop[(k + n - 1) % n].edge), global_edge(cell, loop[k].edge)};
  return {};
}

// Zero crossings of `field` on scan lines across the square face.
std::vector<Point3> face_roots(const Field &field, const GridSpec &grid, const CellIndex &cell,
                               int face, int lines, int steps) {
  int axis = face / 2;
  int u = axis == 0 ? 1 : 0, w = axis == 2 ? 1 : 2;
  double x = grid.coord(axis, cell[static_cast<std::size_t>(axis)] + face % 2);
  double margin = 1e-3 * grid.spacing;
  std::vector<Point3> roots;
  for (int dir = 0; dir < 2; ++dir) {
    int fixed = dir == 0 ? u : w, moving = dir == 0 ? w : u;
    double f0 = grid.coord(fixed, cell[static_cast<std::size_t>(fixed)]);
    double m0 = grid.coord(moving, cell[static_cast<std::size_t>(moving)]) + margin;
    double span = grid.spacing - 2 * margin;
    for (int line = 0; line < lines; ++line) {
      Point3 p;
      p[axis] = x;
      p[fixed] = f0 + grid.spacing * (line + 0.5) / lines;
      auto at = [&](double s) {
        Point3 q = p;
        q[moving] = m0 + span * s;
        return q;
      };
      double prev_s = 0, prev_v = field.value(at(0));
      for (int k = 1; k <= steps; ++k) {
        double s = static_cast<double>(k) / steps, v = field.value(at(s));
        if (prev_v == 0) {
          roots.push_back(at(prev_s));
        } else if ((prev_v < 0) != (v < 0) && v != 0) {
          double lo = prev_s, hi = s;
          bool lo_negative = prev_v < 0;
          for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            double mid = (lo + hi) / 2;
            if (mid <= lo || mid >= hi)
              break;
            double vm = field.value(at(mid));
            if (vm == 0) {
              lo = hi = mid;
              break;
            }
            if ((vm < 0) == lo_negative)
              lo = mid;
            else
              hi = mid;
          }
          roots.push_back(at((lo + hi) / 2));
        }
        prev_s = s;
        prev_v = v;
      }
    }
  }
  return roots;
}

} // namespace

ContinuityReport check_continuity(const CellPatch &a, const CellPatch &b, const GridSpec &grid) {
  auto face = shared_face(a.cell, b.cell);
  if (!face)
    throw InvalidArgument("cells are not face-adjacent");
  int face_b = *face ^ 1;

  ContinuityReport report;
  bool any_loop = false;
  for (std::size_t la = 0; la < a.config.loops.size(); ++la) {
    auto edges = face_crossings(a.cell, a.config.loops[la], *face);
    if (edges.empty())
      continue;
    any_loop = true;
    const CornerPatch *partner = nullptr;
    for (std::size_t lb = 0; lb < b.config.loops.size(); ++lb)
      if (face_crossings(b.cell, b.config.loops[lb], face_b) == edges)
        partner = &b.patches[lb];
    if (!partner) {
      report.matched = false;
      continue;
    }

    const CornerPatch &pa = a.patches[la];
    std::vector<Point3> roots;
    for (int lines = 16, steps = 64; lines <= 256; lines *= 2, steps *= 2) {
      roots = face_roots(pa, grid, a.cell, *face, lines, steps);
      if (roots.size() >= 20)
        break;
    }
    for (const auto &p : roots) {
      report.max_value = std::max(report.max_value, std::abs(partner->value(p)));
      report.max_angle = std::max(report.max_angle, angle_between(pa.gradient(p), partner->gradient(p)));
    }
    report.roots += roots.size();
  }
  // Loops of b crossing the face must all be matched from a's side.
  for (const auto &loop : b.config.loops) {
    auto edges = face_crossings(b.cell, loop, face_b);
    if (edges.empty())
      continue;
    any_loop = true;
    bool found = false;
    for (const auto &la : a.config.loops)
      found = found || face_crossings(a.cell, la, *face) == edges;
    report.matched = report.matched && found;
  }

  report.vacuous = !any_loop || report.roots == 0;
  report.pass = report.matched && report.max_value <= kContinuityValueTol &&
                report.max_angle <= kContinuityAngleTol;
  return report;
}

CellComplex build_complex(const Field &source, const GridSpec &grid) {
  GridSamples samples = sample_grid(source, grid);
  CellComplex complex{grid, {}};
  for (int k = 0; k < grid.dims[2]; ++k)
    for (int j = 0; j < grid.dims[1]; ++j)
      for (int i = 0; i < grid.dims[0]; ++i) {
        CellIndex cell{i, j, k};
        std::uint8_t mask = samples.cell_mask(cell);
        if (mask == 0 || mask == 0xFF)
          continue;
        complex.cells.push_back(build_cell_patch(classify_cell(mask), samples, cell));
      }
  return complex;
}

std::vector<std::pair<std::size_t, std::size_t>> adjacent_cells(const CellComplex &complex) {
  std::map<CellIndex, std::size_t> slot;
  for (std::size_t i = 0; i < complex.cells.size(); ++i)
    slot[complex.cells[i].cell] = i;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < complex.cells.size(); ++i)
    for (int axis = 0; axis < 3; ++axis) {
      CellIndex next = complex.cells[i].cell;
      ++next[static_cast<std::size_t>(axis)];
      if (auto it = slot.find(next); it != slot.end())
        pairs.emplace_back(i, it->second);
    }
  return pairs;
}

} // namespace cip
