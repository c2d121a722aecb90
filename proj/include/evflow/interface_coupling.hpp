#pragma once

/// @file interface_coupling.hpp
/// @brief Subdomain view of the enhanced-velocity system.
///
/// After eliminating the velocity, the flux on each interface sub-edge depends
/// only on the two one-element layers touching the interface:
///
///     u_gamma = A1 p_minus + A2 p_plus.
///
/// Projecting sub-edge fluxes onto the edges of one side (length-weighted
/// averages) and introducing a ghost cell per edge lets each block be solved
/// on its own with Dirichlet data taken from the neighbour. Iterating those
/// decoupled solves gives a block-Jacobi domain decomposition whose fixed
/// point is the monolithic solution.

#include <vector>

#include <Eigen/Core>

#include "evflow/darcy.hpp"
#include "evflow/mesh.hpp"

namespace evflow {

enum class InterfaceSide { Minus, Plus };

struct InterfaceOperators {
  int interface = -1;
  std::vector<int> minus_layer;  ///< global cells touching the interface, ordered along it
  std::vector<int> plus_layer;
  SparseMatrix a1;  ///< sub-edges x minus_layer
  SparseMatrix a2;  ///< sub-edges x plus_layer

  const std::vector<int>& layer(InterfaceSide s) const { return s == InterfaceSide::Minus ? minus_layer : plus_layer; }
};

/// Operators of every interface from the assembled velocity mass diagonal.
std::vector<InterfaceOperators> interface_operators(const Discretization& disc, const Eigen::VectorXd& mass);
std::vector<InterfaceOperators> interface_operators(const Discretization& disc, const PermField& perm);

/// L2 projection from sub-edge constants onto the edge traces of one side.
/// Trace element k is the part of layer cell `cells[k]`'s edge lying on the
/// interface; its row averages the sub-edges it contains by length.
struct TraceProjection {
  int interface = -1;
  InterfaceSide side = InterfaceSide::Minus;
  std::vector<int> cells;
  Eigen::VectorXd lengths;
  SparseMatrix matrix;  ///< trace elements x sub-edges of the interface
};

TraceProjection trace_projection(const Discretization& disc, int interface, InterfaceSide side);

Eigen::VectorXd project_trace(const TraceProjection& proj, const Eigen::VectorXd& psi);

/// Gathers p over a layer.
Eigen::VectorXd layer_values(const Eigen::VectorXd& p, const std::vector<int>& layer);

/// Diagonal transmissibility of the ghost-cell coupling seen from one side:
/// diag(P_minus A1) for the minus side, -diag(P_plus A2) for the plus side.
Eigen::VectorXd ghost_transmissibility(const InterfaceOperators& ops, const TraceProjection& proj);

struct GhostPressures {
  Eigen::VectorXd minus;  ///< ghost values used by the minus block, per minus trace element
  Eigen::VectorXd plus;
};

/// p_e,minus = (A2^minus)^-1 P_minus A2 p_plus and
/// p_e,plus  = (A1^plus)^-1  P_plus  A1 p_minus,
/// with A1^minus = P_minus A1 and A2^minus = -A1^minus (and symmetrically).
GhostPressures ghost_pressures(const Eigen::VectorXd& p_minus_layer, const Eigen::VectorXd& p_plus_layer,
                               const InterfaceOperators& ops, const TraceProjection& proj_minus,
                               const TraceProjection& proj_plus);

/// One block solved on its own, with every interface edge replaced by a
/// ghost-cell Dirichlet coupling. Factored once.
class SubdomainProblem {
 public:
  struct GhostEdge {
    int interface = -1;
    InterfaceSide side = InterfaceSide::Minus;
    int element = -1;  ///< index into the side's trace projection
    int cell = -1;     ///< global cell
    double length = 0.0;
    double transmissibility = 0.0;
  };

  SubdomainProblem(const Discretization& disc, const Eigen::VectorXd& mass, int block,
                   std::vector<GhostEdge> ghosts);

  int block() const { return block_; }
  const std::vector<GhostEdge>& ghosts() const { return ghosts_; }

  struct Result {
    Eigen::VectorXd p;            ///< block cells, local order
    Eigen::VectorXd u;            ///< block-owned global velocity unknowns, see owned_dofs()
    Eigen::VectorXd ghost_flux;   ///< per ghost edge, oriented along +normal
  };

  /// `load` holds global right-hand sides; `ghost_values` one Dirichlet value per ghost edge.
  Result solve(const LoadVectors& load, const Eigen::VectorXd& ghost_values, double tol = 1e-12) const;
  const std::vector<int>& owned_dofs() const { return owned_; }

 private:
  int block_;
  int cell_offset_;
  std::vector<GhostEdge> ghosts_;
  std::vector<int> owned_;
  FactoredMixedSystem system_;
};

/// Per-block ghost edges derived from the trace projections of all interfaces.
std::vector<SubdomainProblem::GhostEdge> block_ghost_edges(const Discretization& disc, int block,
                                                           const std::vector<InterfaceOperators>& ops,
                                                           const std::vector<TraceProjection>& minus_proj,
                                                           const std::vector<TraceProjection>& plus_proj);

struct BlockJacobiResult {
  MixedSolution solution;
  int iterations = 0;
  std::vector<double> history;  ///< l2 change of interface fluxes per sweep
};

class ConvergenceFailure : public SolverError {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> history)
      : SolverError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

/// Block-Jacobi sweeps starting from the mean boundary value, stopping once the l2 change of
/// all interface sub-edge fluxes between sweeps drops below `tol`.
/// Throws ConvergenceFailure after `max_iter` sweeps.
BlockJacobiResult block_jacobi_solve(const ManufacturedCase& mfg, const Discretization& disc, double tol,
                                     int max_iter, int threads = 1);

}  // namespace evflow
