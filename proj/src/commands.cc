#include "cip/commands.hh"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "cip/errors.hh"
#include "cip/polygonize.hh"

namespace cip {

namespace {

std::string format_number(double x) {
  if (x == 0)
    x = 0; // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Point3 parse_point(const std::string &text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      throw InvalidArgument("bad point syntax: " + text);
    }
    if (used != item.size() || !std::isfinite(v))
      throw InvalidArgument("bad point syntax: " + text);
    values.push_back(v);
  }
  if (values.size() != 3)
    throw InvalidArgument("bad point syntax (expected x,y,z): " + text);
  return Point3(values[0], values[1], values[2]);
}

Box default_box(const ScenePatch &sp) { return sp.box.value_or(Box{}); }

void emit(const std::string &text, const std::string &out_path, std::ostream &out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f)
    throw InvalidArgument("cannot write " + out_path);
  f << text;
}

// Points at the corner patch behind a flattened patch index, for in-place updates.
CornerPatch &corner_at(Scene &scene, std::size_t index) {
  if (scene.kind == Scene::Kind::Patches) {
    if (index >= scene.patches.size())
      throw InvalidArgument("patch index out of range");
    auto *p = std::get_if<CornerPatch>(&scene.patches[index].patch);
    if (!p)
      throw InvalidArgument("selected patch is not a corner patch");
    return *p;
  }
  if (scene.kind == Scene::Kind::Cells) {
    for (auto &cell : scene.cells) {
      if (index < cell.patches.size())
        return cell.patches[index];
      index -= cell.patches.size();
    }
    throw InvalidArgument("patch index out of range");
  }
  throw InvalidArgument("a grid source scene has no patches; run the grid command first");
}

std::vector<ScenePatch> patches_of(const Scene &scene) {
  if (scene.kind == Scene::Kind::GridSource)
    return cell_scene(build_complex(*scene.source, *scene.grid)).flatten();
  return scene.flatten();
}

// check suites

struct Suite {
  std::string name;
  bool pass = true;
  std::string detail;
};

Suite check_corners(const std::vector<ScenePatch> &patches) {
  Suite suite{"corners", true, {}};
  std::size_t checked = 0, degenerate = 0, missing = 0;
  double max_value = 0, max_angle = 0;
  for (const auto &sp : patches) {
    const CornerPatch *patch = sp.corner();
    if (!patch)
      continue;
    Box box = default_box(sp);
    auto n = static_cast<std::ptrdiff_t>(patch->sides());
    for (std::ptrdiff_t i = 1; i <= n; ++i) {
      auto p = find_corner_point(*patch, i, box.center());
      if (!p) {
        ++missing;
        continue;
      }
      bool clear = true;
      for (std::ptrdiff_t j = 1; j <= n; ++j)
        if (j != i && j != i % n + 1 && std::abs(patch->bound(j).value(*p)) < 1e-3)
          clear = false;
      if (!clear) {
        ++degenerate;
        continue;
      }
      ++checked;
      max_value = std::max(max_value, std::abs(patch->value(*p)));
      max_angle = std::max(max_angle, corner_gradient_ratio(*patch, i, *p).angle);
    }
  }
  suite.pass = missing == 0 && max_value <= 1e-12 && max_angle <= 1e-6;
  suite.detail = std::to_string(checked) + " corner points, max |f| " + format_number(max_value) +
                 ", max angle " + format_number(max_angle) + " rad";
  if (degenerate)
    suite.detail += ", " + std::to_string(degenerate) + " degenerate skipped";
  if (missing)
    suite.detail += ", " + std::to_string(missing) + " corner points not found";
  return suite;
}

Suite check_continuity_suite(const Scene &scene) {
  Suite suite{"continuity", true, {}};
  if (scene.kind == Scene::Kind::Patches) {
    suite.detail = "vacuous: patch lists carry no cell adjacency";
    return suite;
  }
  CellComplex complex = scene.kind == Scene::Kind::Cells ? complex_from_scene(scene)
                                                         : build_complex(*scene.source, *scene.grid);
  std::size_t pairs = 0, vacuous = 0, failed = 0, roots = 0;
  double max_value = 0, max_angle = 0;
  for (auto [i, j] : adjacent_cells(complex)) {
    ContinuityReport r = check_continuity(complex.cells[i], complex.cells[j], complex.grid);
    ++pairs;
    vacuous += r.vacuous;
    failed += !r.pass;
    roots += r.roots;
    max_value = std::max(max_value, r.max_value);
    max_angle = std::max(max_angle, r.max_angle);
  }
  suite.pass = failed == 0;
  suite.detail = std::to_string(pairs) + " adjacent pairs (" + std::to_string(vacuous) + " vacuous, " +
                 std::to_string(failed) + " failed), " + std::to_string(roots) + " face roots, max |b| " +
                 format_number(max_value) + ", max angle " + format_number(max_angle) + " rad";
  return suite;
}

Suite check_degree(const std::vector<ScenePatch> &patches, int lines) {
  Suite suite{"degree", true, {}};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0, 1);
  std::normal_distribution<double> gauss;
  int max_measured = 0, max_bound = 0;
  std::size_t tested = 0;
  for (const auto &sp : patches) {
    const CornerPatch *patch = sp.corner();
    if (!patch)
      continue;
    auto bound = patch->degree();
    if (!bound)
      continue;
    ++tested;
    Box box = default_box(sp);
    max_bound = std::max(max_bound, *bound);
    for (int l = 0; l < lines; ++l) {
      Vec3 t(unit(rng), unit(rng), unit(rng));
      Point3 origin = box.min + t.cwiseProduct(box.extent());
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      dir.normalize();
      int measured = line_degree(*patch, origin, dir, *bound + 1, 1e-6, box.diagonal() / 2);
      max_measured = std::max(max_measured, measured);
      if (measured > *bound)
        suite.pass = false;
    }
  }
  suite.detail = std::to_string(tested) + " polynomial patches, max degree " + std::to_string(max_measured) +
                 " along " + std::to_string(lines) + " lines each, bound " + std::to_string(max_bound);
  return suite;
}

// demo scenes

PolyField poly_product(const PolyField &a, const PolyField &b) {
  std::map<std::array<int, 3>, double> acc;
  for (const auto &s : a.terms())
    for (const auto &t : b.terms())
      acc[{s.powers[0] + t.powers[0], s.powers[1] + t.powers[1], s.powers[2] + t.powers[2]}] += s.coef * t.coef;
  std::vector<Monomial> terms;
  for (const auto &[powers, coef] : acc)
    if (coef != 0)
      terms.push_back({coef, powers});
  return PolyField(std::move(terms));
}

PolyField sphere_poly(const Point3 &c, double r) {
  std::vector<Monomial> terms{{1, {2, 0, 0}}, {1, {0, 2, 0}}, {1, {0, 0, 2}}};
  if (c[0] != 0)
    terms.push_back({-2 * c[0], {1, 0, 0}});
  if (c[1] != 0)
    terms.push_back({-2 * c[1], {0, 1, 0}});
  if (c[2] != 0)
    terms.push_back({-2 * c[2], {0, 0, 1}});
  terms.push_back({c.squaredNorm() - r * r, {0, 0, 0}});
  return PolyField(std::move(terms));
}

Scene unit_cell_scene(const Field &source) {
  return cell_scene(build_complex(source, GridSpec{}));
}

} // namespace

Scene demo_scene(const std::string &name) {
  if (name == "fig1a")
    return unit_cell_scene(SphereField(Point3(0, 0, 0), 0.6));
  if (name == "fig1b")
    return unit_cell_scene(SphereField(Point3(-1, -1, -1), 2.7));
  if (name == "fig1c") {
    PolyField two = poly_product(sphere_poly(Point3(0, 0, 0), 0.6), sphere_poly(Point3(1, 1, 1), 0.6));
    return unit_cell_scene(two);
  }
  if (name == "fig2") {
    Scene hexagon = demo_scene("fig1b");
    const CellPatch &cell = hexagon.cells.at(0);
    const CornerPatch &base = cell.patches.at(0);
    const Loop &loop = cell.config.loops.at(0);

    // Same corners; side targets pulled towards the face centres.
    InterpolationSpec moved;
    auto n = loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      Point3 a = find_corner_point(base, static_cast<std::ptrdiff_t>((i + n - 1) % n + 1), Point3::Constant(0.5)).value();
      Point3 b = find_corner_point(base, static_cast<std::ptrdiff_t>(i + 1), Point3::Constant(0.5)).value();
      Point3 mid = (a + b) / 2;
      Point3 centre = Point3::Constant(0.5);
      int axis = loop[i].face / 2;
      centre[axis] = mid[axis];
      moved.boundary_targets.push_back({static_cast<std::ptrdiff_t>(i + 1), mid + 0.2 * (centre - mid)});
    }
    CornerPatch boundaries = interpolate(base, moved).patch;

    InterpolationSpec inner;
    inner.interior_target = Point3(0.4, 0.4, 0.4);
    CornerPatch interior = interpolate(base, inner).patch;

    Scene scene;
    scene.kind = Scene::Kind::Patches;
    Box unit;
    scene.patches = {{base, unit}, {boundaries, unit}, {interior, unit}};
    return scene;
  }
  throw InvalidArgument("unknown demo \"" + name + "\" (fig1a, fig1b, fig1c, fig2)");
}

int run_cli(std::vector<std::string> args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Corner I-patch toolkit: evaluate, solve, fit, grid, mesh, check and demo scenes", "cipatch"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string scene_path, out_path;
  app.add_option("--scene", scene_path, "Scene JSON file");
  app.add_option("--out", out_path, "Output file (default: standard output)");

  std::size_t patch_index = 0;
  std::optional<std::size_t> mesh_patch;

  auto *eval = app.add_subcommand("eval", "Evaluate a patch at a point");
  std::string point_text;
  bool with_gradient = false;
  eval->add_option("--point", point_text, "x,y,z")->required();
  eval->add_option("--patch", patch_index, "Patch index");
  eval->add_flag("--gradient", with_gradient, "Also print the gradient");

  auto *solve = app.add_subcommand("solve", "Interpolate boundary and interior targets");
  std::string targets_path;
  solve->add_option("--targets", targets_path, "Targets JSON")->required();
  solve->add_option("--patch", patch_index, "Patch index");

  auto *fit = app.add_subcommand("fit", "Least-squares fit of all weights to a sample cloud");
  std::string samples_path;
  fit->add_option("--samples", samples_path, "XYZ sample file")->required();
  fit->add_option("--patch", patch_index, "Patch index");

  app.add_subcommand("grid", "Build corner patches on a cube grid from a source field");

  auto *mesh = app.add_subcommand("mesh", "Polygonize patches to OBJ");
  int resolution = 64, project_iters = 8;
  mesh->add_option("--resolution", resolution, "Subcells per box edge")->check(CLI::Range(2, 1024));
  mesh->add_option("--project-iters", project_iters, "Newton projection iterations")->check(CLI::NonNegativeNumber);
  mesh->add_option("--patch", mesh_patch, "Only this patch");

  auto *check = app.add_subcommand("check", "Verify corner, continuity and degree properties");
  bool corners = false, continuity = false, degree = false;
  int lines = 100;
  check->add_flag("--corners", corners, "Corner interpolation and G1 check");
  check->add_flag("--continuity", continuity, "Cross-cell continuity check");
  check->add_flag("--degree", degree, "Polynomial degree along random lines");
  check->add_option("--lines", lines, "Random lines per patch for --degree")->check(CLI::PositiveNumber);

  auto *demo = app.add_subcommand("demo", "Emit a built-in scene");
  std::string demo_name;
  demo->add_option("name", demo_name, "fig1a | fig1b | fig1c | fig2")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitArgumentError;
  }

  auto needs_scene = [&]() {
    if (scene_path.empty())
      throw InvalidArgument("--scene is required");
    return load_scene(scene_path);
  };

  try {
    if (eval->parsed()) {
      Scene scene = needs_scene();
      Point3 p = parse_point(point_text);
      auto patches = patches_of(scene);
      if (patch_index >= patches.size())
        throw InvalidArgument("patch index out of range");
      const Field &f = patches[patch_index].field();
      std::string text = format_number(f.value(p)) + "\n";
      if (with_gradient) {
        Vec3 g = f.gradient(p);
        text += format_number(g[0]) + " " + format_number(g[1]) + " " + format_number(g[2]) + "\n";
      }
      emit(text, out_path, out);
      return kExitOk;
    }

    if (solve->parsed()) {
      Scene scene = needs_scene();
      InterpolationSpec spec;
      {
        std::ifstream f(targets_path);
        if (!f)
          throw InvalidArgument("cannot open targets " + targets_path);
        Json j;
        try {
          j = Json::parse(f);
        } catch (const Json::exception &e) {
          throw ParseError(targets_path + ": " + e.what());
        }
        spec = targets_from_json(j);
      }
      CornerPatch &patch = corner_at(scene, patch_index);
      Interpolation result = interpolate(patch, spec);
      patch = result.patch;
      err << "side  residual\n";
      for (std::size_t k = 0; k < spec.boundary_targets.size(); ++k)
        err << spec.boundary_targets[k].side << "  " << format_number(result.boundary_residuals[k]) << "\n";
      if (result.interior_residual)
        err << "interior  " << format_number(*result.interior_residual) << "\n";
      emit(dump_json(scene_to_json(scene)), out_path, out);
      return kExitOk;
    }

    if (fit->parsed()) {
      Scene scene = needs_scene();
      std::ifstream f(samples_path);
      if (!f)
        throw InvalidArgument("cannot open samples " + samples_path);
      auto samples = read_xyz(f);
      CornerPatch &patch = corner_at(scene, patch_index);
      LsqFit result = fit_weights_lsq(patch, samples);
      patch = patch.with_weights(result.side_weights, result.interior_weight);
      err << "samples " << samples.size() << ", rms residual " << format_number(result.rms_residual)
          << " (zero weights " << format_number(result.rms_zero_weights) << ")\n";
      emit(dump_json(scene_to_json(scene)), out_path, out);
      return kExitOk;
    }

    if (app.got_subcommand("grid")) {
      Scene scene = needs_scene();
      if (scene.kind != Scene::Kind::GridSource)
        throw ParseError("grid needs a scene with \"grid\" and \"source\"");
      CellComplex complex = build_complex(*scene.source, *scene.grid);
      std::size_t count = 0;
      for (const auto &c : complex.cells)
        count += c.patches.size();
      err << complex.cells.size() << " nonempty cells, " << count << " patches\n";
      emit(dump_json(scene_to_json(cell_scene(complex))), out_path, out);
      return kExitOk;
    }

    if (mesh->parsed()) {
      Scene scene = needs_scene();
      auto patches = patches_of(scene);
      if (mesh_patch) {
        if (*mesh_patch >= patches.size())
          throw InvalidArgument("patch index out of range");
        patches = {patches[*mesh_patch]};
      }
      std::vector<Mesh> meshes;
      std::size_t unconverged = 0;
      double max_residual = 0;
      for (const auto &sp : patches) {
        Mesh m = polygonize(sp.field(), default_box(sp), resolution);
        Projection proj = project_to_surface(m, sp.field(), project_iters);
        unconverged += proj.unconverged.size();
        max_residual = std::max(max_residual, proj.max_residual);
        meshes.push_back(std::move(proj.mesh));
      }
      Mesh merged = merge_meshes(meshes);
      std::string summary = std::to_string(merged.vertices.size()) + " vertices, " +
                            std::to_string(merged.triangles.size()) + " triangles, max |f| " +
                            format_number(max_residual) + ", " + std::to_string(unconverged) + " unconverged\n";
      if (out_path.empty()) {
        write_obj(merged, out);
        err << summary;
      } else {
        export_obj(merged, out_path);
        out << summary;
      }
      return kExitOk;
    }

    if (check->parsed()) {
      Scene scene = needs_scene();
      if (!corners && !continuity && !degree)
        corners = continuity = degree = true;
      std::vector<Suite> suites;
      std::vector<ScenePatch> patches;
      if (corners || degree)
        patches = patches_of(scene);
      if (corners)
        suites.push_back(check_corners(patches));
      if (continuity)
        suites.push_back(check_continuity_suite(scene));
      if (degree)
        suites.push_back(check_degree(patches, lines));
      bool all = true;
      std::string text;
      for (const auto &s : suites) {
        text += s.name + ": " + (s.pass ? "PASS" : "FAIL") + " (" + s.detail + ")\n";
        all = all && s.pass;
      }
      emit(text, out_path, out);
      return all ? kExitOk : kExitCheckFailed;
    }

    if (demo->parsed()) {
      emit(dump_json(scene_to_json(demo_scene(demo_name))), out_path, out);
      return kExitOk;
    }
  } catch (const ParseError &e) {
    err << "scene error: " << e.what() << "\n";
    return kExitSceneError;
  } catch (const InvalidArgument &e) {
    err << "argument error: " << e.what() << "\n";
    return kExitArgumentError;
  } catch (const SolverError &e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolverError;
  } catch (const GridError &e) {
    err << "grid error: " << e.what() << "\n";
    return kExitGridError;
  }
  return kExitArgumentError;
}

} // namespace cip
