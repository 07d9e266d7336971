#pragma once

#include <cstdint>
#include <string>

#include "odb/superop.hpp"

namespace odb::cli {

// Everything a subcommand needs, merged from the JSON config file and the
// command line.  Flags win over file values, which win over the defaults
// below; see docs/output_schema.md for the precedence rules and field names.
struct RunConfig {
  // Desk-scale defaults: resolved sideband regime with a mildly thermal
  // bath. gamma is chosen so kappa/gamma is not a half-integer: rational
  // rate ratios make shifted copies of the mechanical spectrum collide
  // exactly and the eigenvector recursion refuses degenerate solves.
  sop::SystemParams params{5.0, 1.0, 0.05, 0.3, 0.021, 0.5, sop::Variant::weak};
  int Nc = 4;
  int Nm = 14;
  int buffer = 16;   // extra mechanical levels used while building elements

  // label ranges swept by spectrum/verify
  int l_max = 2;
  int n_max = 2;
  int k_max = 2;
  int m_max = 2;

  // per-check tolerances used by `verify`
  double tol_spectrum = 1e-6;
  double tol_residual = 1e-7;
  double tol_gram = 1e-7;
  double tol_crosstrace = 1e-8;
  double tol_pathsum = 1e-6;

  std::string format = "json";  // "json" or "csv"
  std::uint64_t seed = 1;
  int jobs = 0;  // 0 = library default thread count

  // throws (a std::runtime_error subtype mapped to exit code 2) on
  // out-of-range values
  void validate() const;
};

// Parses the JSON document at `path` into `cfg`, overwriting only the fields
// present in the file.  Unknown keys are an error (typo protection).
void load_config_file(const std::string& path, RunConfig& cfg);

// Full command-line entry point; returns the process exit code.
// 0 = success, 1 = a verification check failed or a computation error
// occurred, 2 = usage or configuration error.
int run_cli(int argc, const char* const* argv);

}  // namespace odb::cli
