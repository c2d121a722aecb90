#pragma once

/// @file postprocess.hpp
/// @brief Interface velocity recovery from a post-processed pressure.
///
/// Pipeline, per element then per subdomain:
///   1. edge multipliers lambda from the local residual of the mixed equations,
///   2. a local polynomial in span{1, x, y, x^2, y^2} matching the cell mean
///      of p_h and the four edge averages lambda,
///   3. a continuous Q2 field per subdomain by nodal averaging,
///   4. a two-point flux across every interface sub-edge from that field.

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "evflow/darcy.hpp"
#include "evflow/mesh.hpp"

namespace evflow {

/// Per cell, one value per side in Side order.
struct EdgeMultipliers {
  std::vector<std::array<double, 4>> values;

  double operator()(int cell, Side s) const { return values[cell][static_cast<int>(s)]; }
};

/// p(xi, eta) = c0 + c1 xi + c2 eta + c3 xi^2 + c4 eta^2 with xi, eta in [-1, 1]
/// the cell coordinates centered at the cell center and scaled by (hx/2, hy/2).
struct LocalPoly5 {
  std::array<double, 5> c{};

  double operator()(double xi, double eta) const {
    return c[0] + c[1] * xi + c[2] * eta + c[3] * xi * xi + c[4] * eta * eta;
  }
  double mean() const { return c[0] + (c[3] + c[4]) / 3.0; }
  double edge_average(Side s) const;
};

/// Fits the polynomial with cell mean `mean` and edge averages `edges` (Side order).
LocalPoly5 fit_local_poly5(double mean, const std::array<double, 4>& edges);

/// lambda(e) = p_T - K^-1(e) (u.n_T)(e) h_perp / 2, the residual of the local
/// mixed equation tested with the element basis function of edge e. Fluxes on
/// sides split into several pieces enter through their length-weighted mean.
EdgeMultipliers compute_lagrange_multipliers(const MixedSolution& sol, const PermField& perm,
                                             const MultiblockMesh& mesh, const DofMap& dofs);

std::vector<LocalPoly5> postprocess_pressure(const Eigen::VectorXd& p, const EdgeMultipliers& lambda);

/// Largest violation of the cell-mean and edge-average constraints.
double max_constraint_residual(const std::vector<LocalPoly5>& poly, const Eigen::VectorXd& p,
                               const EdgeMultipliers& lambda);

/// Continuous piecewise-Q2 field on one block, stored at the
/// (2 nx + 1) x (2 ny + 1) Lagrange nodes.
class NodalQ2Field {
 public:
  explicit NodalQ2Field(SubdomainGrid grid);

  const SubdomainGrid& grid() const { return grid_; }
  int nodes_x() const { return 2 * grid_.nx() + 1; }
  int nodes_y() const { return 2 * grid_.ny() + 1; }
  double& node(int a, int b) { return values_[a + nodes_x() * b]; }
  double node(int a, int b) const { return values_[a + nodes_x() * b]; }
  Point node_position(int a, int b) const;
  const std::vector<double>& values() const { return values_; }

  /// Q2 interpolation inside cell (i, j) at reference coordinates.
  double evaluate_in_cell(int i, int j, double xi, double eta) const;
  /// Evaluation at a point of the block (clamped to the owning cell).
  double evaluate(Point p) const;

 private:
  SubdomainGrid grid_;
  std::vector<double> values_;
};

/// Nodal averaging of the local polynomials of one block. Nodes on the outer
/// boundary take the Dirichlet value; nodes on interfaces average only over
/// cells of this block.
NodalQ2Field oswald_average(const std::vector<LocalPoly5>& poly, const MultiblockMesh& mesh, int block,
                            const std::function<double(Point)>& boundary);

/// Flux from the minus to the plus side between two pressure samples at
/// normal distances d_minus, d_plus: -(s_plus - s_minus) / (d_minus/K_minus + d_plus/K_plus).
double two_point_flux(double s_minus, double s_plus, double d_minus, double d_plus, double k_minus, double k_plus);

/// Where the two pressure samples of a sub-edge flux are taken.
enum class TwoPointStencil {
  /// Square stencil centered on the sub-edge: both samples at half the
  /// sub-edge length from the interface (capped by the adjacent cell widths).
  SubEdgeSymmetric,
  /// Samples on the center lines of the two adjacent cells.
  HalfCell,
};

/// Recovered normal flux per interface sub-edge, positive from minus to plus block.
struct RecoveredFlux {
  Eigen::VectorXd values;
};

RecoveredFlux recover_interface_velocity(const std::vector<NodalQ2Field>& fields, const PermField& perm,
                                         const MultiblockMesh& mesh, const InterfaceMesh& trace,
                                         TwoPointStencil stencil = TwoPointStencil::SubEdgeSymmetric);

struct PostFields {
  EdgeMultipliers lambda;
  std::vector<LocalPoly5> poly;
  std::vector<NodalQ2Field> smooth;  ///< one per block
  RecoveredFlux recovered;
};

PostFields run_postprocess(const Discretization& disc, const MixedSolution& sol, const ManufacturedCase& mfg,
                           TwoPointStencil stencil = TwoPointStencil::SubEdgeSymmetric);

}  // namespace evflow
