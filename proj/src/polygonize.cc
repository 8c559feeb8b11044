#include "cip/polygonize.hh"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "cip/cell_table.hh"
#include "cip/errors.hh"

namespace cip {

double triangle_area(const Point3 &a, const Point3 &b, const Point3 &c) {
  return (b - a).cross(c - a).norm() / 2;
}

void Mesh::validate() const {
  if (!rails.empty() && rails.size() != vertices.size())
    throw InvalidArgument("mesh rails do not match vertices");
  for (const auto &t : triangles) {
    for (auto i : t)
      if (i >= vertices.size())
        throw InvalidArgument("mesh triangle index out of range");
    if (triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < kMinTriangleArea)
      throw InvalidArgument("degenerate mesh triangle");
  }
}

namespace {

struct Lattice {
  Box box;
  int resolution;

  // Endpoints are pinned to the box so adjacent boxes agree bitwise.
  double coord(int axis, int i) const {
    if (i == 0)
      return box.min[axis];
    if (i == resolution)
      return box.max[axis];
    return box.min[axis] + (box.max[axis] - box.min[axis]) * i / resolution;
  }
  Point3 point(int i, int j, int k) const { return Point3(coord(0, i), coord(1, j), coord(2, k)); }
  std::size_t slot(int i, int j, int k) const {
    auto n = static_cast<std::size_t>(resolution + 1);
    return static_cast<std::size_t>(i) + n * (static_cast<std::size_t>(j) + n * static_cast<std::size_t>(k));
  }
};

class DisjointSets {
public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x)
      x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
  std::vector<std::size_t> parent_;
};

Mesh compact(const Mesh &mesh, const std::vector<bool> &keep_triangle) {
  Mesh result;
  std::vector<std::size_t> remap(mesh.vertices.size(), SIZE_MAX);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!keep_triangle[t])
      continue;
    std::array<std::size_t, 3> tri;
    for (std::size_t c = 0; c < 3; ++c) {
      std::size_t v = mesh.triangles[t][c];
      if (remap[v] == SIZE_MAX) {
        remap[v] = result.vertices.size();
        result.vertices.push_back(mesh.vertices[v]);
        result.rails.push_back(mesh.rails[v]);
      }
      tri[c] = remap[v];
    }
    result.triangles.push_back(tri);
  }
  return result;
}

} // namespace

Mesh polygonize(const Field &field, const Box &box, int resolution) {
  if (resolution < 2)
    throw InvalidArgument("polygonization resolution must be at least 2");
  Lattice lattice{box, resolution};
  const int r = resolution;

  std::vector<double> values(lattice.slot(r, r, r) + 1);
  for (int k = 0; k <= r; ++k)
    for (int j = 0; j <= r; ++j)
      for (int i = 0; i <= r; ++i) {
        Point3 p = lattice.point(i, j, k);
        double v = field.value(p);
        // Exact zeros are typically double roots (two bounds meeting along a
        // box edge); they take the sign of the field just inside the box so
        // they do not sprout sliver surfaces.
        if (v == 0)
          v = field.value(p + 1e-7 * (box.center() - p));
        values[lattice.slot(i, j, k)] = v;
      }

  std::array<CellConfig, 256> configs;
  for (int m = 0; m < 256; ++m)
    configs[static_cast<std::size_t>(m)] = classify_cell(static_cast<std::uint8_t>(m));

  Mesh mesh;
  std::unordered_map<std::uint64_t, std::size_t> edge_vertex;
  auto vertex_on = [&](const std::array<int, 3> &start, int axis) -> std::size_t {
    auto key = (static_cast<std::uint64_t>(lattice.slot(start[0], start[1], start[2])) << 2) |
               static_cast<std::uint64_t>(axis);
    if (auto it = edge_vertex.find(key); it != edge_vertex.end())
      return it->second;
    auto end = start;
    ++end[static_cast<std::size_t>(axis)];
    Point3 p0 = lattice.point(start[0], start[1], start[2]), p1 = lattice.point(end[0], end[1], end[2]);
    double v0 = values[lattice.slot(start[0], start[1], start[2])];
    double v1 = values[lattice.slot(end[0], end[1], end[2])];
    Point3 p = p0;
    p[axis] = p0[axis] + (p1[axis] - p0[axis]) * (v0 / (v0 - v1));
    std::optional<VertexRail> rail;
    bool on_boundary = false;
    for (int a = 0; a < 3; ++a)
      if (a != axis && (start[static_cast<std::size_t>(a)] == 0 || start[static_cast<std::size_t>(a)] == r))
        on_boundary = true;
    if (on_boundary)
      rail = VertexRail{p0, p1};
    mesh.vertices.push_back(p);
    mesh.rails.push_back(rail);
    edge_vertex.emplace(key, mesh.vertices.size() - 1);
    return mesh.vertices.size() - 1;
  };

  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) {
        unsigned mask = 0;
        for (int v = 0; v < cube::kVertices; ++v) {
          auto o = cube::vertex_offset(v);
          if (values[lattice.slot(i + o[0], j + o[1], k + o[2])] < 0)
            mask |= 1u << v;
        }
        if (mask == 0 || mask == 0xFF)
          continue;
        for (const auto &loop : configs[mask].loops) {
          std::vector<std::size_t> ids;
          for (const auto &entry : loop) {
            auto o = cube::vertex_offset(cube::edge_vertices(entry.edge)[0]);
            ids.push_back(vertex_on({i + o[0], j + o[1], k + o[2]}, cube::edge_axis(entry.edge)));
          }
          for (std::size_t t = 1; t + 1 < ids.size(); ++t)
            mesh.triangles.push_back({ids[0], ids[t + 1], ids[t]});
        }
      }

  // Drop degenerate triangles, then tiny interior components.
  std::vector<bool> keep(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &tri = mesh.triangles[t];
    keep[t] = triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]) >=
              kMinTriangleArea;
  }
  DisjointSets sets(mesh.vertices.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    if (keep[t]) {
      sets.join(mesh.triangles[t][0], mesh.triangles[t][1]);
      sets.join(mesh.triangles[t][1], mesh.triangles[t][2]);
    }
  struct Extent {
    Point3 lo = Point3::Constant(INFINITY), hi = Point3::Constant(-INFINITY);
    bool touches_box = false;
  };
  std::unordered_map<std::size_t, Extent> extents;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    auto &e = extents[sets.find(v)];
    e.lo = e.lo.cwiseMin(mesh.vertices[v]);
    e.hi = e.hi.cwiseMax(mesh.vertices[v]);
    e.touches_box = e.touches_box || mesh.rails[v].has_value();
  }
  double min_diameter = 2 * box.extent().maxCoeff() / resolution;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!keep[t])
      continue;
    const auto &e = extents[sets.find(mesh.triangles[t][0])];
    if (!e.touches_box && (e.hi - e.lo).norm() < min_diameter)
      keep[t] = false;
  }
  return compact(mesh, keep);
}

namespace {

// Secant steps on the bracket [a, b] along a rail, falling back to bisection.
Point3 solve_on_rail(const Field &field, const VertexRail &rail, const Point3 &start, bool &ok) {
  Point3 a = rail.from, b = rail.to;
  double fa = field.value(a), fb = field.value(b);
  ok = true;
  if (fa == 0)
    return a;
  if (fb == 0)
    return b;
  if ((fa < 0) == (fb < 0)) {
    ok = false;
    return start;
  }
  Point3 x = start;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    double fx = field.value(x);
    if (fx == 0)
      return x;
    if ((fx < 0) == (fa < 0)) {
      a = x;
      fa = fx;
      if (side == -1)
        fb /= 2;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1)
        fa /= 2;
      side = 1;
    }
    Point3 next = a + (b - a) * (fa / (fa - fb));
    if (!((next - a).dot(b - a) > 0 && (b - next).dot(b - a) > 0))
      next = (a + b) / 2;
    if ((next - x).norm() == 0 || (b - a).norm() <= 1e-15 * (1 + a.norm()))
      return next;
    x = next;
  }
  return x;
}

} // namespace

Projection project_to_surface(const Mesh &mesh, const Field &field, int iterations) {
  Projection result{mesh, {}, 0};
  if (result.mesh.rails.size() != mesh.vertices.size())
    result.mesh.rails.assign(mesh.vertices.size(), std::nullopt);

  for (std::size_t i = 0; i < result.mesh.vertices.size(); ++i) {
    Point3 &v = result.mesh.vertices[i];
    bool converged = true;
    bool handled = false;
    if (const auto &rail = result.mesh.rails[i]) {
      bool ok;
      Point3 p = solve_on_rail(field, *rail, v, ok);
      if (ok) {
        v = p;
        handled = true;
      }
    }
    if (!handled) {
      for (int it = 0; it < iterations; ++it) {
        double f = field.value(v);
        if (f == 0)
          break;
        Vec3 g = field.gradient(v);
        if (!(g.norm() >= 1e-9)) {
          converged = false;
          break;
        }
        Vec3 step = f * g / g.squaredNorm();
        bool improved = false;
        for (int halving = 0; halving < 30; ++halving) {
          Point3 next = v - step;
          if (std::abs(field.value(next)) < std::abs(f)) {
            v = next;
            improved = true;
            break;
          }
          step /= 2;
        }
        if (!improved)
          break;
      }
    }
    double residual = std::abs(field.value(v));
    // an isolated singular zero is not a surface point
    if (converged && !(field.gradient(v).norm() >= 1e-9))
      converged = false;
    if (!converged || residual > 1e-9)
      result.unconverged.push_back(i);
    else
      result.max_residual = std::max(result.max_residual, residual);
  }
  return result;
}

Mesh merge_meshes(const std::vector<Mesh> &meshes) {
  Mesh result;
  for (const auto &m : meshes) {
    std::size_t offset = result.vertices.size();
    result.vertices.insert(result.vertices.end(), m.vertices.begin(), m.vertices.end());
    if (m.rails.size() == m.vertices.size())
      result.rails.insert(result.rails.end(), m.rails.begin(), m.rails.end());
    else
      result.rails.resize(result.vertices.size());
    for (const auto &t : m.triangles)
      result.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  }
  return result;
}

void write_obj(const Mesh &mesh, std::ostream &os) {
  char buf[128];
  os << "# corner patch mesh: " << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
     << " triangles\n";
  for (const auto &v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", v[0], v[1], v[2]);
    os << buf;
  }
  for (const auto &t : mesh.triangles)
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void export_obj(const Mesh &mesh, const std::filesystem::path &path) {
  std::ofstream f(path);
  if (!f)
    throw InvalidArgument("cannot open " + path.string() + " for writing");
  write_obj(mesh, f);
  if (!f)
    throw InvalidArgument("failed writing " + path.string());
}

} // namespace cip
