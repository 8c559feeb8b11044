#pragma once

#include <stdexcept>
#include <string>

namespace cip {

// Malformed input: bad indices, invalid constructor arguments, broken invariants.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A weight solve or fit cannot be carried out for the given targets/samples.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Hermite data or cell geometry that cannot host a corner patch.
struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scene/descriptor JSON that does not follow the schema.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace cip
