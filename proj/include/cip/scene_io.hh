#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cip/cells.hh"
#include "cip/patch.hh"
#include "cip/solver.hh"

namespace cip {

using Json = nlohmann::json;

// Field descriptors:
//   {"plane": {"normal": [a, b, c], "offset": d}}
//   {"poly": [{"coef": c, "powers": [i, j, k]}, ...]}
//   {"sphere": {"center": [x, y, z], "radius": r}}
FieldPtr field_from_json(const Json &j);
Json field_to_json(const Field &field);

// {"n": 3, "bounds": [...], "corners": [...], "side_weights": [...], "interior_weight": w}
CornerPatch corner_patch_from_json(const Json &j);
Json corner_patch_to_json(const CornerPatch &patch);

// {"n": 2, "ribbons": [...], "bounds": [...], "side_weights": [...], "w0": w, "k": 2}
SideIPatch side_ipatch_from_json(const Json &j);
Json side_ipatch_to_json(const SideIPatch &patch);

GridSpec grid_from_json(const Json &j);
Json grid_to_json(const GridSpec &grid);

struct ScenePatch {
  std::variant<CornerPatch, SideIPatch> patch;
  std::optional<Box> box;

  const Field &field() const;
  const CornerPatch *corner() const { return std::get_if<CornerPatch>(&patch); }
};

// Three scene shapes share one file format:
//   patch list  {"patches": [patch descriptor (+ "box": {"min": [...], "max": [...]}), ...]}
//   grid scene  {"grid": {"origin": [...], "spacing": h, "dims": [...]}, "source": field}
//   cell scene  {"grid": {...}, "cells": [{"index": [i, j, k], "negative_mask": m,
//                                          "patches": [corner descriptor + "loop"]}]}
struct Scene {
  enum class Kind { Patches, GridSource, Cells };
  Kind kind = Kind::Patches;
  std::vector<ScenePatch> patches;
  std::optional<GridSpec> grid;
  FieldPtr source;
  std::vector<CellPatch> cells;

  // Every patch with its box; cell patches get their cell box.
  std::vector<ScenePatch> flatten() const;
};

// Unknown keys and schema violations raise ParseError.
Scene scene_from_json(const Json &j);
Json scene_to_json(const Scene &scene);
Scene load_scene(const std::filesystem::path &path);
// Sorted keys, shortest round-trip floats, two-space indent, trailing newline.
std::string dump_json(const Json &j);

Scene cell_scene(const CellComplex &complex);
CellComplex complex_from_scene(const Scene &scene);

// {"boundary_targets": [{"side": 1, "point": [x, y, z]}, ...], "interior_target": [x, y, z]}
InterpolationSpec targets_from_json(const Json &j);

// Whitespace-separated XYZ triples, one point per line; '#' starts a comment.
std::vector<Point3> read_xyz(std::istream &is);

} // namespace cip
