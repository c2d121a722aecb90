#pragma once

/// @file darcy.hpp
/// @brief Enhanced-velocity mixed discretization of u = -K grad p, div u = f.
///
/// The velocity mass matrix uses the trapezoidal rule along each component's
/// own direction and the midpoint rule across it. With that quadrature every
/// lowest-order Raviart-Thomas basis function (including the sub-edge basis
/// functions living on strips of interface cells) only sees itself, so the
/// mass matrix is diagonal and the velocity can be eliminated exactly.

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "evflow/mesh.hpp"

namespace evflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Diagonal permeability over viscosity.
struct DiagTensor {
  double xx = 1.0;
  double yy = 1.0;

  double along(Axis a) const { return a == Axis::X ? xx : yy; }
};

class PermField {
 public:
  using Evaluator = std::function<DiagTensor(Point)>;

  PermField() : PermField([](Point) { return DiagTensor{}; }, 1.0, 1.0) {}
  PermField(Evaluator eval, double kmin, double kmax);

  static PermField constant(double k) {
    return PermField([k](Point) { return DiagTensor{k, k}; }, k, k);
  }

  /// Evaluates K and rejects samples outside [kmin, kmax] or nonpositive ones.
  DiagTensor operator()(Point p) const;
  double kmin() const { return kmin_; }
  double kmax() const { return kmax_; }

 private:
  Evaluator eval_;
  double kmin_;
  double kmax_;
};

struct ManufacturedCase {
  std::string name;
  std::function<double(Point)> pressure;
  std::function<Vec2(Point)> velocity;  ///< -K grad p
  std::function<double(Point)> source;  ///< div u
  PermField perm;

  /// Dirichlet data, the trace of the exact pressure.
  double boundary(Point p) const { return pressure(p); }
};

struct LoadVectors {
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
};

struct MixedSolution {
  Eigen::VectorXd u;  ///< normal flux per velocity unknown, oriented along +normal
  Eigen::VectorXd p;  ///< cell pressures
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Diagonal of the quadrature mass matrix (K^-1 u, v). Entry for an unknown
/// of length l with adjacent cell widths h_minus, h_plus is
/// K^-1(midpoint) * l * (h_minus + h_plus) / 2.
Eigen::VectorXd assemble_velocity_mass(const MultiblockMesh& mesh, const DofMap& dofs, const PermField& perm);

/// Cells x velocity unknowns; entry is +length for the minus cell, -length for the plus cell.
SparseMatrix assemble_divergence(const MultiblockMesh& mesh, const DofMap& dofs);

/// Midpoint-rule loads: -<g, v.nu> on outer boundary pieces and (f, 1)_T per cell.
LoadVectors assemble_rhs(const ManufacturedCase& mfg, const MultiblockMesh& mesh, const DofMap& dofs);

/// D B^-1 D^T.
SparseMatrix schur_matrix(const Eigen::VectorXd& mass, const SparseMatrix& div);

/// Cell-centered Schur system factored once, reusable for many load vectors.
class FactoredMixedSystem {
 public:
  FactoredMixedSystem(Eigen::VectorXd mass, SparseMatrix div);
  ~FactoredMixedSystem();
  FactoredMixedSystem(FactoredMixedSystem&&) noexcept;
  FactoredMixedSystem& operator=(FactoredMixedSystem&&) noexcept;

  const SparseMatrix& schur() const { return schur_; }
  MixedSolution solve(const Eigen::VectorXd& load_u, const Eigen::VectorXd& load_p, double tol = 1e-12) const;

 private:
  struct Factor;
  Eigen::VectorXd inv_mass_;
  SparseMatrix div_;
  SparseMatrix schur_;
  std::unique_ptr<Factor> factor_;
};

/// Eliminates u = B^-1 (D^T p + b_u) and solves the SPD cell system.
/// Throws SolverError when the factorization fails or the residual
/// stays above `tol` relative to the right-hand side.
MixedSolution solve_monolithic(const Eigen::VectorXd& mass, const SparseMatrix& div, const Eigen::VectorXd& load_u,
                               const Eigen::VectorXd& load_p, double tol = 1e-12);

/// max_T | sum_e +-u_e |e| - f(c_T) |T| |
double residual_mass_conservation(const MixedSolution& sol, const ManufacturedCase& mfg, const MultiblockMesh& mesh,
                                  const DofMap& dofs);

/// Assemble and solve in one call.
MixedSolution solve_case(const ManufacturedCase& mfg, const Discretization& disc, double tol = 1e-12);

}  // namespace evflow
