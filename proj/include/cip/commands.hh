#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cip/scene_io.hh"

namespace cip {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitSceneError = 2,
  kExitArgumentError = 3,
  kExitSolverError = 4,
  kExitGridError = 5,
};

// Runs one command line (args excludes the program name).
int run_cli(std::vector<std::string> args, std::ostream &out, std::ostream &err);

// Built-in scenes: fig1a (3-sided), fig1b (6-sided), fig1c (two components in
// one cell), fig2 (three patches sharing corners, different weights).
Scene demo_scene(const std::string &name);

} // namespace cip
