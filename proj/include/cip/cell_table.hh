#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cip/field.hh"

namespace cip {

// Local numbering of the unit cube.
//   vertex v: offset (v & 1, (v >> 1) & 1, (v >> 2) & 1)
//   edge e:   4 * axis + bit of the lower other axis + 2 * bit of the higher other axis
//   face f:   2 * axis + side, side 0 at the low coordinate
namespace cube {

constexpr int kVertices = 8;
constexpr int kEdges = 12;
constexpr int kFaces = 6;

std::array<int, 3> vertex_offset(int v);
int edge_axis(int e);
// Endpoints ordered low to high along the edge axis.
std::array<int, 2> edge_vertices(int e);
std::array<int, 2> edge_faces(int e);
// Counterclockwise when viewed from outside the cube.
std::array<int, 4> face_vertices(int f);
// face_edges(f)[k] joins face_vertices(f)[k] and face_vertices(f)[(k + 1) % 4].
std::array<int, 4> face_edges(int f);
Vec3 face_normal(int f); // outward
int edge_between(int v0, int v1); // -1 if not a cube edge

} // namespace cube

// One side of a boundary loop: the loop runs across `face` and reaches the
// crossing on `edge`. Consecutive entries share that edge, so corner i of the
// resulting patch lies on entries[i].edge between entries[i].face and
// entries[i + 1].face.
struct LoopEntry {
  int face = 0;
  int edge = 0;
  bool operator==(const LoopEntry &) const = default;
};

using Loop = std::vector<LoopEntry>;

// Vertex signs of a cell (bit v set when vertex v is negative) and the closed
// loops the zero set traces on the cube boundary. Loops keep the negative
// region on their left when viewed from outside the cube. On a face whose
// negative vertices are diagonal, the negative vertices are separated.
struct CellConfig {
  std::uint8_t negative_mask = 0;
  std::vector<Loop> loops;

  std::uint16_t crossing_edges() const; // bit e set when edge e changes sign
  std::uint8_t active_faces() const;    // bit f set when a loop crosses face f
};

CellConfig classify_cell(std::uint8_t negative_mask);
CellConfig classify_cell(const std::array<bool, 8> &negative);

} // namespace cip
