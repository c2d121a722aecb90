#pragma once

/// @file config.hpp
/// @brief Run configuration: a JSON document with "schema": 1.
///
/// Keys (all optional except "schema" and "test"):
///
///   schema          1
///   test            1 | 2 | "test1" | "test2" | "constant" | "linear-x"
///   value           constant pressure for "constant" (default 1)
///   permeability    scalar K for "constant" and "linear-x" (default 1)
///   layout          "checkerboard2x2" or a list of {"x0","x1","y0","y1","nx","ny"}
///   levels          strictly increasing list of n (default [8, 16, 32, 48])
///   n               single level, shorthand for "levels": [n]
///   ratio           coarse/fine ratio of the checkerboard (default 4)
///   convention      "coarse-per-unit" (n = 1/H) or "fine-block" (n fine cells per block)
///   stencil         "sub-edge" or "half-cell"
///   tol             linear solver tolerance (default 1e-12)
///   weighted        length-weighted interface error (default true)
///   block_jacobi    solve via block-Jacobi sweeps instead of monolithically
///   dd_tol          sweep stopping tolerance (default 1e-10)
///   dd_max_iter     sweep limit (default 50000)
///   csv             output path for convergence tables
///   vtk             output directory for fields

#include <optional>
#include <string>
#include <vector>

#include "evflow/darcy.hpp"
#include "evflow/mesh.hpp"
#include "evflow/verification.hpp"

namespace evflow {

struct ConfigError {
  std::string key;
  std::string reason;
};

struct RunConfig {
  std::string test = "test1";
  double value = 1.0;
  double permeability = 1.0;
  std::string layout = "checkerboard2x2";
  std::vector<BlockSpec> blocks;  ///< explicit layout only
  std::vector<int> levels{8, 16, 32, 48};
  StudyOptions study;
  bool block_jacobi = false;
  double dd_tol = 1e-10;
  int dd_max_iter = 50000;
  std::string csv;
  std::string vtk;

  bool explicit_layout() const { return !blocks.empty(); }
  ManufacturedCase make_case() const;
  /// Mesh for level n (the checkerboard) or the explicit block list.
  MultiblockMesh make_mesh(int n) const;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<ConfigError> errors;

  bool ok() const { return config.has_value(); }
  std::string message() const;
};

ParseResult parse_config(const std::string& text);

}  // namespace evflow
