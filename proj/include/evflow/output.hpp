#pragma once

/// @file output.hpp
/// @brief Convergence tables as CSV and per-block fields as legacy VTK.

#include <iosfwd>
#include <string>
#include <vector>

#include "evflow/darcy.hpp"
#include "evflow/mesh.hpp"
#include "evflow/postprocess.hpp"
#include "evflow/verification.hpp"

namespace evflow {

inline constexpr const char* kConvergenceHeader = "n,e_u,order_u,e_rec,order_rec";

/// Six significant digits in scientific notation, e.g. 1.23457e-02.
std::string format_sci(double v);

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
/// Throws std::runtime_error on a malformed table.
std::vector<ConvergenceRow> read_convergence_csv(std::istream& in);

/// Writes `<dir>/block<b>.vtk` for every block and returns the paths.
/// Each file is a STRUCTURED_POINTS grid of the block's vertices with
///   POINT_DATA s_h               recovered pressure at the vertices
///   CELL_DATA  pressure          cell pressure
///              s_h_center        recovered pressure at cell centers
///              flux_left/right/bottom/top  normal flux per side (+axis oriented,
///                                length-weighted mean over split sides)
std::vector<std::string> write_vtk_fields(const std::string& dir, const Discretization& disc,
                                          const MixedSolution& sol, const PostFields& post);

}  // namespace evflow
