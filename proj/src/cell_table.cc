#include "cip/cell_table.hh"

#include <algorithm>
#include <cassert>
#include <optional>

#include "cip/errors.hh"

namespace cip {

namespace cube {

namespace {

// The two axes other than `axis`, in increasing order.
std::array<int, 2> other_axes(int axis) {
  switch (axis) {
  case 0: return {1, 2};
  case 1: return {0, 2};
  default: return {0, 1};
  }
}

int vertex_from_offset(const std::array<int, 3> &o) { return o[0] | (o[1] << 1) | (o[2] << 2); }

} // namespace

std::array<int, 3> vertex_offset(int v) { return {v & 1, (v >> 1) & 1, (v >> 2) & 1}; }

int edge_axis(int e) { return e / 4; }

std::array<int, 2> edge_vertices(int e) {
  int axis = e / 4;
  auto others = other_axes(axis);
  std::array<int, 3> o{0, 0, 0};
  o[others[0]] = e & 1;
  o[others[1]] = (e >> 1) & 1;
  int v0 = vertex_from_offset(o);
  o[axis] = 1;
  return {v0, vertex_from_offset(o)};
}

std::array<int, 2> edge_faces(int e) {
  int axis = e / 4;
  auto others = other_axes(axis);
  return {2 * others[0] + (e & 1), 2 * others[1] + ((e >> 1) & 1)};
}

std::array<int, 4> face_vertices(int f) {
  int axis = f / 2, side = f % 2;
  auto others = other_axes(axis);
  const int square[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::array<int, 4> result;
  for (int k = 0; k < 4; ++k) {
    std::array<int, 3> o{0, 0, 0};
    o[axis] = side;
    o[others[0]] = square[k][0];
    o[others[1]] = square[k][1];
    result[static_cast<std::size_t>(k)] = vertex_from_offset(o);
  }
  // (u, w) order is counterclockwise seen from +axis for axes 0 and 2 and from
  // -axis for axis 1; flip where that faces inward.
  bool ccw_from_outside = (axis == 1) ? side == 0 : side == 1;
  if (!ccw_from_outside)
    std::reverse(result.begin(), result.end());
  return result;
}

int edge_between(int v0, int v1) {
  int diff = v0 ^ v1;
  if (diff != 1 && diff != 2 && diff != 4)
    return -1;
  int axis = diff == 1 ? 0 : diff == 2 ? 1 : 2;
  auto others = other_axes(axis);
  auto o = vertex_offset(v0);
  return 4 * axis + o[others[0]] + 2 * o[others[1]];
}

std::array<int, 4> face_edges(int f) {
  auto v = face_vertices(f);
  std::array<int, 4> result;
  for (std::size_t k = 0; k < 4; ++k)
    result[k] = edge_between(v[k], v[(k + 1) % 4]);
  return result;
}

Vec3 face_normal(int f) {
  Vec3 n = Vec3::Zero();
  n[f / 2] = (f % 2) ? 1.0 : -1.0;
  return n;
}

} // namespace cube

namespace {

Point3 vertex_point(int v) {
  auto o = cube::vertex_offset(v);
  return Point3(o[0], o[1], o[2]);
}

Point3 edge_midpoint(int e) {
  auto v = cube::edge_vertices(e);
  return (vertex_point(v[0]) + vertex_point(v[1])) / 2;
}

bool is_negative(std::uint8_t mask, int v) { return (mask >> v) & 1; }

struct Segment {
  int face, from, to;
};

// Orients the segment a-b on face f so that `negative_vertex` lies on its left
// when viewed from outside.
Segment oriented(int f, int a, int b, int negative_vertex) {
  Point3 ma = edge_midpoint(a), mb = edge_midpoint(b);
  Vec3 left = cube::face_normal(f).cross(mb - ma);
  if ((vertex_point(negative_vertex) - ma).dot(left) > 0)
    return {f, a, b};
  return {f, b, a};
}

std::vector<Segment> face_segments(std::uint8_t mask, int f) {
  auto verts = cube::face_vertices(f);
  auto edges = cube::face_edges(f);
  std::vector<int> crossing;
  for (std::size_t k = 0; k < 4; ++k)
    if (is_negative(mask, verts[k]) != is_negative(mask, verts[(k + 1) % 4]))
      crossing.push_back(edges[k]);
  if (crossing.empty())
    return {};

  if (crossing.size() == 2) {
    int negative = *std::find_if(verts.begin(), verts.end(), [&](int v) { return is_negative(mask, v); });
    return {oriented(f, crossing[0], crossing[1], negative)};
  }

  // Four crossings: two diagonal negative vertices, each cut off by its own segment.
  std::vector<Segment> result;
  for (std::size_t k = 0; k < 4; ++k) {
    if (!is_negative(mask, verts[k]))
      continue;
    int before = edges[(k + 3) % 4], after = edges[k];
    result.push_back(oriented(f, before, after, verts[k]));
  }
  return result;
}

} // namespace

std::uint16_t CellConfig::crossing_edges() const {
  std::uint16_t bits = 0;
  for (const auto &loop : loops)
    for (const auto &entry : loop)
      bits |= static_cast<std::uint16_t>(1u << entry.edge);
  return bits;
}

std::uint8_t CellConfig::active_faces() const {
  std::uint8_t bits = 0;
  for (const auto &loop : loops)
    for (const auto &entry : loop)
      bits |= static_cast<std::uint8_t>(1u << entry.face);
  return bits;
}

CellConfig classify_cell(std::uint8_t negative_mask) {
  std::array<std::optional<std::pair<int, int>>, cube::kEdges> next; // edge -> (face, next edge)
  for (int f = 0; f < cube::kFaces; ++f)
    for (const auto &s : face_segments(negative_mask, f)) {
      assert(!next[static_cast<std::size_t>(s.from)]);
      next[static_cast<std::size_t>(s.from)] = std::make_pair(s.face, s.to);
    }

  CellConfig config;
  config.negative_mask = negative_mask;
  std::array<bool, cube::kEdges> visited{};
  for (int start = 0; start < cube::kEdges; ++start) {
    if (!next[static_cast<std::size_t>(start)] || visited[static_cast<std::size_t>(start)])
      continue;
    Loop loop;
    int current = start;
    do {
      visited[static_cast<std::size_t>(current)] = true;
      auto [face, to] = *next[static_cast<std::size_t>(current)];
      loop.push_back({face, to});
      current = to;
    } while (current != start);
    config.loops.push_back(std::move(loop));
  }
  return config;
}

CellConfig classify_cell(const std::array<bool, 8> &negative) {
  std::uint8_t mask = 0;
  for (int v = 0; v < 8; ++v)
    if (negative[static_cast<std::size_t>(v)])
      mask = static_cast<std::uint8_t>(mask | (1u << v));
  return classify_cell(mask);
}

} // namespace cip
