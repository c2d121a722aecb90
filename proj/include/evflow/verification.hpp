#pragma once

/// @file verification.hpp
/// @brief Manufactured solutions, interface error metrics and convergence studies.

#include <optional>
#include <span>
#include <vector>

#include "evflow/darcy.hpp"
#include "evflow/mesh.hpp"
#include "evflow/postprocess.hpp"

namespace evflow {

/// Test 1 (K = I) or test 2 (K = 15 - 10 sin(3 pi x) sin(3 pi y)), both with
/// p = sin(2 pi x) sin(2 pi y). Throws std::invalid_argument for other ids.
ManufacturedCase manufactured_case(int id);
ManufacturedCase constant_case(double value, double k = 1.0);
/// p = x with constant K.
ManufacturedCase linear_x_case(double k = 1.0);

/// Normalized discrete L2 error of normal fluxes on all interface sub-edges,
/// sampled at sub-edge midpoints. `weighted` uses sub-edge lengths as weights.
/// When the exact flux vanishes on the whole interface the unnormalized error
/// is returned.
double interface_velocity_error(std::span<const double> flux, const InterfaceMesh& trace, const ManufacturedCase& mfg,
                                bool weighted = true);

/// Normalized cell-center velocity error over cells whose centers lie farther
/// than `min_distance` from every interface.
double interior_velocity_error(const MixedSolution& sol, const Discretization& disc, const ManufacturedCase& mfg,
                               double min_distance);

/// log(e1/e2) / log(n2/n1)
double convergence_order(double e1, double e2, double n1, double n2);

struct ConvergenceRow {
  int n = 0;
  double e_u = 0.0;
  std::optional<double> order_u;
  double e_rec = 0.0;
  std::optional<double> order_rec;
};

/// Everything measured at one refinement level.
struct LevelReport {
  int n = 0;
  int cells = 0;
  double e_u = 0.0;
  double e_rec = 0.0;
  double interior_error = 0.0;
  double mass_residual = 0.0;
  double constraint_residual = 0.0;
};

/// How a table level n maps onto the 2x2 checkerboard.
enum class LevelConvention {
  /// n coarse cells per unit length: H = 1/n, h = H/ratio, so each fine block
  /// carries n*ratio/2 cells per direction and each coarse block n/2.
  CoarsePerUnit,
  /// n cells per direction in each fine block, n/ratio in each coarse block.
  FineBlockCells,
};

struct StudyOptions {
  LevelConvention convention = LevelConvention::CoarsePerUnit;
  TwoPointStencil stencil = TwoPointStencil::SubEdgeSymmetric;
  int ratio = 4;
  double tol = 1e-12;
  bool weighted = true;
  double interior_distance = 0.2;
  int threads = 1;  ///< levels solved concurrently
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  std::vector<LevelReport> levels;
};

/// Throws std::invalid_argument when n cannot be realized under the convention.
void validate_level(int n, LevelConvention convention, int ratio);
MultiblockMesh checkerboard_level(int n, LevelConvention convention, int ratio);

LevelReport run_level(const ManufacturedCase& mfg, int n, const StudyOptions& opts);

/// Checkerboard meshes at each n, solve, recover, errors and orders.
ConvergenceStudy convergence_study(const ManufacturedCase& mfg, const std::vector<int>& levels,
                                   const StudyOptions& opts = {});
ConvergenceStudy convergence_study(int test_id, const std::vector<int>& levels, const StudyOptions& opts = {});

}  // namespace evflow
