#include "cip/scene_io.hh"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "cip/errors.hh"

namespace cip {

namespace {

void expect_keys(const Json &j, std::initializer_list<const char *> required,
                 std::initializer_list<const char *> optional, const std::string &what) {
  if (!j.is_object())
    throw ParseError(what + ": expected an object");
  std::set<std::string> allowed;
  for (const char *k : required) {
    if (!j.contains(k))
      throw ParseError(what + ": missing key \"" + k + "\"");
    allowed.insert(k);
  }
  for (const char *k : optional)
    allowed.insert(k);
  for (const auto &[key, value] : j.items())
    if (!allowed.count(key))
      throw ParseError(what + ": unknown key \"" + key + "\"");
}

double number(const Json &j, const std::string &what) {
  if (!j.is_number())
    throw ParseError(what + ": expected a number");
  return j.get<double>();
}

int integer(const Json &j, const std::string &what) {
  if (!j.is_number_integer())
    throw ParseError(what + ": expected an integer");
  return j.get<int>();
}

Vec3 vec3(const Json &j, const std::string &what) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(what + ": expected an array of 3 numbers");
  return Vec3(number(j[0], what), number(j[1], what), number(j[2], what));
}

Json vec3_json(const Vec3 &v) { return Json::array({v[0], v[1], v[2]}); }

std::vector<FieldPtr> field_list(const Json &j, const std::string &what) {
  if (!j.is_array())
    throw ParseError(what + ": expected an array of fields");
  std::vector<FieldPtr> result;
  for (const auto &f : j)
    result.push_back(field_from_json(f));
  return result;
}

std::vector<double> number_list(const Json &j, const std::string &what) {
  if (!j.is_array())
    throw ParseError(what + ": expected an array of numbers");
  std::vector<double> result;
  for (const auto &x : j)
    result.push_back(number(x, what));
  return result;
}

Box box_from_json(const Json &j) {
  expect_keys(j, {"min", "max"}, {}, "box");
  Box box{vec3(j["min"], "box.min"), vec3(j["max"], "box.max")};
  if (!(box.min.array() < box.max.array()).all())
    throw ParseError("box: min must be below max on every axis");
  return box;
}

Json box_to_json(const Box &box) { return {{"min", vec3_json(box.min)}, {"max", vec3_json(box.max)}}; }

template <typename F> auto rethrow_as_parse(F &&f) {
  try {
    return f();
  } catch (const InvalidArgument &e) {
    throw ParseError(e.what());
  }
}

} // namespace

FieldPtr field_from_json(const Json &j) {
  if (!j.is_object() || j.size() != 1)
    throw ParseError("field: expected an object with exactly one of plane/poly/sphere");
  return rethrow_as_parse([&]() -> FieldPtr {
    if (j.contains("plane")) {
      const Json &p = j["plane"];
      expect_keys(p, {"normal", "offset"}, {}, "plane");
      return std::make_shared<Plane>(vec3(p["normal"], "plane.normal"), number(p["offset"], "plane.offset"));
    }
    if (j.contains("poly")) {
      if (!j["poly"].is_array())
        throw ParseError("poly: expected an array of terms");
      std::vector<Monomial> terms;
      for (const auto &t : j["poly"]) {
        expect_keys(t, {"coef", "powers"}, {}, "poly term");
        const Json &pw = t["powers"];
        if (!pw.is_array() || pw.size() != 3)
          throw ParseError("poly term: powers must be 3 integers");
        terms.push_back({number(t["coef"], "poly.coef"),
                         {integer(pw[0], "powers"), integer(pw[1], "powers"), integer(pw[2], "powers")}});
      }
      return std::make_shared<PolyField>(std::move(terms));
    }
    if (j.contains("sphere")) {
      const Json &s = j["sphere"];
      expect_keys(s, {"center", "radius"}, {}, "sphere");
      return std::make_shared<SphereField>(vec3(s["center"], "sphere.center"), number(s["radius"], "sphere.radius"));
    }
    throw ParseError("field: unknown kind \"" + j.begin().key() + "\"");
  });
}

Json field_to_json(const Field &field) {
  if (auto *p = dynamic_cast<const Plane *>(&field))
    return {{"plane", {{"normal", vec3_json(p->normal())}, {"offset", p->offset()}}}};
  if (auto *p = dynamic_cast<const PolyField *>(&field)) {
    Json terms = Json::array();
    for (const auto &t : p->terms())
      terms.push_back({{"coef", t.coef}, {"powers", {t.powers[0], t.powers[1], t.powers[2]}}});
    return {{"poly", terms}};
  }
  if (auto *s = dynamic_cast<const SphereField *>(&field))
    return {{"sphere", {{"center", vec3_json(s->center())}, {"radius", s->radius()}}}};
  throw InvalidArgument("field kind has no descriptor");
}

CornerPatch corner_patch_from_json(const Json &j) {
  expect_keys(j, {"n", "bounds", "corners", "side_weights", "interior_weight"}, {}, "corner patch");
  int n = integer(j["n"], "n");
  auto bounds = field_list(j["bounds"], "bounds");
  auto corners = field_list(j["corners"], "corners");
  auto weights = number_list(j["side_weights"], "side_weights");
  if (static_cast<int>(bounds.size()) != n || static_cast<int>(corners.size()) != n ||
      static_cast<int>(weights.size()) != n)
    throw ParseError("corner patch: bounds, corners and side_weights must all have n entries");
  return rethrow_as_parse([&] {
    return CornerPatch(bounds, corners, weights, number(j["interior_weight"], "interior_weight"));
  });
}

Json corner_patch_to_json(const CornerPatch &patch) {
  Json bounds = Json::array(), corners = Json::array();
  auto n = static_cast<std::ptrdiff_t>(patch.sides());
  for (std::ptrdiff_t i = 1; i <= n; ++i) {
    bounds.push_back(field_to_json(patch.bound(i)));
    corners.push_back(field_to_json(patch.corner(i)));
  }
  return {{"n", n}, {"bounds", bounds}, {"corners", corners},
          {"side_weights", patch.side_weights()}, {"interior_weight", patch.interior_weight()}};
}

SideIPatch side_ipatch_from_json(const Json &j) {
  expect_keys(j, {"n", "ribbons", "bounds", "side_weights", "w0", "k"}, {}, "side I-patch");
  int n = integer(j["n"], "n");
  auto ribbons = field_list(j["ribbons"], "ribbons");
  auto bounds = field_list(j["bounds"], "bounds");
  auto weights = number_list(j["side_weights"], "side_weights");
  if (static_cast<int>(bounds.size()) != n || static_cast<int>(ribbons.size()) != n ||
      static_cast<int>(weights.size()) != n)
    throw ParseError("side I-patch: ribbons, bounds and side_weights must all have n entries");
  return rethrow_as_parse([&] {
    return SideIPatch(ribbons, bounds, weights, number(j["w0"], "w0"), integer(j["k"], "k"));
  });
}

Json side_ipatch_to_json(const SideIPatch &patch) {
  Json ribbons = Json::array(), bounds = Json::array();
  for (const auto &r : patch.ribbons())
    ribbons.push_back(field_to_json(*r));
  for (const auto &b : patch.bounds())
    bounds.push_back(field_to_json(*b));
  return {{"n", patch.sides()}, {"ribbons", ribbons}, {"bounds", bounds},
          {"side_weights", patch.weights()}, {"w0", patch.w0()}, {"k", patch.exponent()}};
}

GridSpec grid_from_json(const Json &j) {
  expect_keys(j, {"origin", "spacing", "dims"}, {}, "grid");
  const Json &d = j["dims"];
  if (!d.is_array() || d.size() != 3)
    throw ParseError("grid.dims: expected 3 integers");
  GridSpec grid{vec3(j["origin"], "grid.origin"), number(j["spacing"], "grid.spacing"),
                {integer(d[0], "dims"), integer(d[1], "dims"), integer(d[2], "dims")}};
  rethrow_as_parse([&] {
    grid.validate();
    return 0;
  });
  return grid;
}

Json grid_to_json(const GridSpec &grid) {
  return {{"origin", vec3_json(grid.origin)}, {"spacing", grid.spacing},
          {"dims", {grid.dims[0], grid.dims[1], grid.dims[2]}}};
}

const Field &ScenePatch::field() const {
  return std::visit([](const auto &p) -> const Field & { return p; }, patch);
}

std::vector<ScenePatch> Scene::flatten() const {
  if (kind != Kind::Cells)
    return patches;
  std::vector<ScenePatch> result;
  for (const auto &cell : cells)
    for (const auto &p : cell.patches)
      result.push_back({p, grid->cell_box(cell.cell)});
  return result;
}

namespace {

ScenePatch scene_patch_from_json(const Json &j) {
  if (!j.is_object())
    throw ParseError("patch: expected an object");
  Json descriptor = j;
  std::optional<Box> box;
  if (descriptor.contains("box")) {
    box = box_from_json(descriptor["box"]);
    descriptor.erase("box");
  }
  if (descriptor.contains("ribbons"))
    return {side_ipatch_from_json(descriptor), box};
  return {corner_patch_from_json(descriptor), box};
}

CellPatch cell_from_json(const Json &j) {
  expect_keys(j, {"index", "negative_mask", "patches"}, {}, "cell");
  const Json &idx = j["index"];
  if (!idx.is_array() || idx.size() != 3)
    throw ParseError("cell.index: expected 3 integers");
  CellPatch cell;
  cell.cell = {integer(idx[0], "index"), integer(idx[1], "index"), integer(idx[2], "index")};
  int mask = integer(j["negative_mask"], "negative_mask");
  if (mask < 0 || mask > 255)
    throw ParseError("cell.negative_mask must be in [0, 255]");
  cell.config = classify_cell(static_cast<std::uint8_t>(mask));
  const Json &patches = j["patches"];
  if (!patches.is_array() || patches.size() != cell.config.loops.size())
    throw ParseError("cell: need one patch per boundary loop");
  for (std::size_t k = 0; k < patches.size(); ++k) {
    Json descriptor = patches[k];
    if (!descriptor.is_object() || !descriptor.contains("loop"))
      throw ParseError("cell patch: missing key \"loop\"");
    Loop loop;
    for (const auto &entry : descriptor["loop"]) {
      if (!entry.is_array() || entry.size() != 2)
        throw ParseError("cell patch loop: expected [face, edge] pairs");
      loop.push_back({integer(entry[0], "face"), integer(entry[1], "edge")});
    }
    if (loop != cell.config.loops[k])
      throw ParseError("cell patch loop does not match the cell's sign configuration");
    descriptor.erase("loop");
    cell.patches.push_back(corner_patch_from_json(descriptor));
  }
  return cell;
}

Json cell_to_json(const CellPatch &cell) {
  Json patches = Json::array();
  for (std::size_t k = 0; k < cell.patches.size(); ++k) {
    Json p = corner_patch_to_json(cell.patches[k]);
    Json loop = Json::array();
    for (const auto &entry : cell.config.loops[k])
      loop.push_back({entry.face, entry.edge});
    p["loop"] = loop;
    patches.push_back(p);
  }
  return {{"index", {cell.cell[0], cell.cell[1], cell.cell[2]}},
          {"negative_mask", cell.config.negative_mask}, {"patches", patches}};
}

} // namespace

Scene scene_from_json(const Json &j) {
  if (!j.is_object())
    throw ParseError("scene: expected an object");
  Scene scene;
  if (j.contains("patches")) {
    expect_keys(j, {"patches"}, {}, "scene");
    if (!j["patches"].is_array())
      throw ParseError("scene.patches: expected an array");
    scene.kind = Scene::Kind::Patches;
    for (const auto &p : j["patches"])
      scene.patches.push_back(scene_patch_from_json(p));
    return scene;
  }
  if (j.contains("source")) {
    expect_keys(j, {"grid", "source"}, {}, "grid scene");
    scene.kind = Scene::Kind::GridSource;
    scene.grid = grid_from_json(j["grid"]);
    scene.source = field_from_json(j["source"]);
    return scene;
  }
  expect_keys(j, {"grid", "cells"}, {}, "cell scene");
  if (!j["cells"].is_array())
    throw ParseError("scene.cells: expected an array");
  scene.kind = Scene::Kind::Cells;
  scene.grid = grid_from_json(j["grid"]);
  for (const auto &c : j["cells"]) {
    scene.cells.push_back(cell_from_json(c));
    for (int a = 0; a < 3; ++a) {
      int i = scene.cells.back().cell[static_cast<std::size_t>(a)];
      if (i < 0 || i >= scene.grid->dims[static_cast<std::size_t>(a)])
        throw ParseError("cell index outside the grid");
    }
  }
  return scene;
}

Json scene_to_json(const Scene &scene) {
  switch (scene.kind) {
  case Scene::Kind::Patches: {
    Json patches = Json::array();
    for (const auto &sp : scene.patches) {
      Json p = std::visit(
        [](const auto &patch) -> Json {
          if constexpr (std::is_same_v<std::decay_t<decltype(patch)>, CornerPatch>)
            return corner_patch_to_json(patch);
          else
            return side_ipatch_to_json(patch);
        },
        sp.patch);
      if (sp.box)
        p["box"] = box_to_json(*sp.box);
      patches.push_back(p);
    }
    return {{"patches", patches}};
  }
  case Scene::Kind::GridSource:
    return {{"grid", grid_to_json(*scene.grid)}, {"source", field_to_json(*scene.source)}};
  case Scene::Kind::Cells: {
    Json cells = Json::array();
    for (const auto &c : scene.cells)
      cells.push_back(cell_to_json(c));
    return {{"grid", grid_to_json(*scene.grid)}, {"cells", cells}};
  }
  }
  return {};
}

Scene load_scene(const std::filesystem::path &path) {
  std::ifstream f(path);
  if (!f)
    throw ParseError("cannot open scene " + path.string());
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception &e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return scene_from_json(j);
}

std::string dump_json(const Json &j) { return j.dump(2) + "\n"; }

Scene cell_scene(const CellComplex &complex) {
  Scene scene;
  scene.kind = Scene::Kind::Cells;
  scene.grid = complex.grid;
  scene.cells = complex.cells;
  return scene;
}

CellComplex complex_from_scene(const Scene &scene) {
  if (scene.kind != Scene::Kind::Cells)
    throw InvalidArgument("scene holds no cell patches");
  return {*scene.grid, scene.cells};
}

InterpolationSpec targets_from_json(const Json &j) {
  expect_keys(j, {}, {"boundary_targets", "interior_target"}, "targets");
  InterpolationSpec spec;
  if (j.contains("boundary_targets")) {
    if (!j["boundary_targets"].is_array())
      throw ParseError("boundary_targets: expected an array");
    for (const auto &t : j["boundary_targets"]) {
      expect_keys(t, {"side", "point"}, {}, "boundary target");
      spec.boundary_targets.push_back({integer(t["side"], "side"), vec3(t["point"], "point")});
    }
  }
  if (j.contains("interior_target") && !j["interior_target"].is_null())
    spec.interior_target = vec3(j["interior_target"], "interior_target");
  return spec;
}

std::vector<Point3> read_xyz(std::istream &is) {
  std::vector<Point3> points;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> values;
    double x;
    while (ls >> x)
      values.push_back(x);
    if (!ls.eof())
      throw ParseError("sample line " + std::to_string(line_no) + ": not a number");
    if (values.empty())
      continue;
    if (values.size() != 3)
      throw ParseError("sample line " + std::to_string(line_no) + ": expected 3 coordinates");
    points.emplace_back(values[0], values[1], values[2]);
  }
  return points;
}

} // namespace cip
