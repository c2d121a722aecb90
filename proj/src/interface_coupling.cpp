#include "evflow/interface_coupling.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <unordered_map>

namespace evflow {

namespace {

using Triplet = Eigen::Triplet<double>;

int layer_cell(const SubEdge& se, InterfaceSide side) { return side == InterfaceSide::Minus ? se.minus_cell : se.plus_cell; }

// Cells of one side in the order they appear along the interface. Each
// cell's edge meets the interface in one contiguous run of sub-edges.
std::vector<int> ordered_layer(const Interface& iface, const InterfaceMesh& trace, InterfaceSide side) {
  std::vector<int> cells;
  for (int e : iface.sub_edges) {
    const int c = layer_cell(trace.sub_edges[e], side);
    if (cells.empty() || cells.back() != c) cells.push_back(c);
  }
  return cells;
}

}  // namespace

std::vector<InterfaceOperators> interface_operators(const Discretization& disc, const Eigen::VectorXd& mass) {
  std::vector<InterfaceOperators> out;
  const auto& trace = disc.trace;
  for (int i = 0; i < static_cast<int>(trace.interfaces.size()); ++i) {
    const auto& iface = trace.interfaces[i];
    InterfaceOperators ops;
    ops.interface = i;
    ops.minus_layer = ordered_layer(iface, trace, InterfaceSide::Minus);
    ops.plus_layer = ordered_layer(iface, trace, InterfaceSide::Plus);

    std::unordered_map<int, int> minus_pos, plus_pos;
    for (int k = 0; k < static_cast<int>(ops.minus_layer.size()); ++k) minus_pos[ops.minus_layer[k]] = k;
    for (int k = 0; k < static_cast<int>(ops.plus_layer.size()); ++k) plus_pos[ops.plus_layer[k]] = k;

    std::vector<Triplet> t1, t2;
    const int m = static_cast<int>(iface.sub_edges.size());
    for (int r = 0; r < m; ++r) {
      const auto& se = trace.sub_edges[iface.sub_edges[r]];
      const int d = disc.dofs.sub_edge_dof(iface.sub_edges[r]);
      const double g = se.length / mass[d];
      t1.emplace_back(r, minus_pos.at(se.minus_cell), g);
      t2.emplace_back(r, plus_pos.at(se.plus_cell), -g);
    }
    ops.a1.resize(m, static_cast<int>(ops.minus_layer.size()));
    ops.a2.resize(m, static_cast<int>(ops.plus_layer.size()));
    ops.a1.setFromTriplets(t1.begin(), t1.end());
    ops.a2.setFromTriplets(t2.begin(), t2.end());
    out.push_back(std::move(ops));
  }
  return out;
}

std::vector<InterfaceOperators> interface_operators(const Discretization& disc, const PermField& perm) {
  return interface_operators(disc, assemble_velocity_mass(disc.mesh, disc.dofs, perm));
}

TraceProjection trace_projection(const Discretization& disc, int interface, InterfaceSide side) {
  const auto& iface = disc.trace.interfaces.at(interface);
  TraceProjection proj;
  proj.interface = interface;
  proj.side = side;
  proj.cells = ordered_layer(iface, disc.trace, side);
  proj.lengths = Eigen::VectorXd::Zero(static_cast<int>(proj.cells.size()));

  std::vector<std::pair<int, int>> rows;  // (element, local sub-edge)
  int k = -1;
  for (int r = 0; r < static_cast<int>(iface.sub_edges.size()); ++r) {
    const auto& se = disc.trace.sub_edges[iface.sub_edges[r]];
    if (k < 0 || proj.cells[k] != layer_cell(se, side)) ++k;
    proj.lengths[k] += se.length;
    rows.emplace_back(k, r);
  }
  std::vector<Triplet> entries;
  for (auto [elem, r] : rows) {
    entries.emplace_back(elem, r, disc.trace.sub_edges[iface.sub_edges[r]].length / proj.lengths[elem]);
  }
  proj.matrix.resize(static_cast<int>(proj.cells.size()), static_cast<int>(iface.sub_edges.size()));
  proj.matrix.setFromTriplets(entries.begin(), entries.end());
  return proj;
}

Eigen::VectorXd project_trace(const TraceProjection& proj, const Eigen::VectorXd& psi) {
  if (psi.size() != proj.matrix.cols()) throw std::invalid_argument("trace projection: wrong sub-edge count");
  return proj.matrix * psi;
}

Eigen::VectorXd layer_values(const Eigen::VectorXd& p, const std::vector<int>& layer) {
  Eigen::VectorXd out(static_cast<int>(layer.size()));
  for (std::size_t k = 0; k < layer.size(); ++k) out[static_cast<int>(k)] = p[layer[k]];
  return out;
}

Eigen::VectorXd ghost_transmissibility(const InterfaceOperators& ops, const TraceProjection& proj) {
  const bool minus = proj.side == InterfaceSide::Minus;
  if (proj.cells != ops.layer(proj.side)) throw std::invalid_argument("projection and operators disagree on layer");
  const SparseMatrix m = minus ? SparseMatrix(proj.matrix * ops.a1) : SparseMatrix(-(proj.matrix * ops.a2));
  Eigen::VectorXd tau = Eigen::VectorXd(m.diagonal());
  // Each trace element only touches its own layer cell.
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) throw std::logic_error("projected operator is not diagonal");
    }
  }
  return tau;
}

GhostPressures ghost_pressures(const Eigen::VectorXd& p_minus_layer, const Eigen::VectorXd& p_plus_layer,
                               const InterfaceOperators& ops, const TraceProjection& proj_minus,
                               const TraceProjection& proj_plus) {
  const Eigen::VectorXd tau_minus = ghost_transmissibility(ops, proj_minus);
  const Eigen::VectorXd tau_plus = ghost_transmissibility(ops, proj_plus);
  GhostPressures g;
  // A2^minus = -tau_minus, A1^plus = tau_plus.
  g.minus = -(proj_minus.matrix * (ops.a2 * p_plus_layer)).cwiseQuotient(tau_minus);
  g.plus = (proj_plus.matrix * (ops.a1 * p_minus_layer)).cwiseQuotient(tau_plus);
  return g;
}

namespace {

struct LocalSystem {
  std::vector<int> owned;
  Eigen::VectorXd mass;
  SparseMatrix div;
};

LocalSystem build_local(const Discretization& disc, const Eigen::VectorXd& mass, int block,
                        const std::vector<SubdomainProblem::GhostEdge>& ghosts) {
  const auto& mesh = disc.mesh;
  const int offset = mesh.cell_offset(block);
  const int ncell = mesh.block(block).num_cells();
  auto local = [&](int c) { return (c >= offset && c < offset + ncell) ? c - offset : -1; };

  LocalSystem sys;
  for (int d = 0; d < disc.dofs.num_velocity(); ++d) {
    const auto& v = disc.dofs.velocity(d);
    if (v.kind == DofKind::Interface) continue;
    const int c = v.minus_cell >= 0 ? v.minus_cell : v.plus_cell;
    if (local(c) >= 0) sys.owned.push_back(d);
  }
  const int nowned = static_cast<int>(sys.owned.size());
  const int nu = nowned + static_cast<int>(ghosts.size());
  sys.mass.resize(nu);
  std::vector<Triplet> entries;
  for (int k = 0; k < nowned; ++k) {
    const auto& v = disc.dofs.velocity(sys.owned[k]);
    sys.mass[k] = mass[sys.owned[k]];
    if (v.minus_cell >= 0) entries.emplace_back(local(v.minus_cell), k, v.length);
    if (v.plus_cell >= 0) entries.emplace_back(local(v.plus_cell), k, -v.length);
  }
  for (std::size_t g = 0; g < ghosts.size(); ++g) {
    const auto& ge = ghosts[g];
    const int k = nowned + static_cast<int>(g);
    if (!(ge.transmissibility > 0.0)) throw SolverError("ghost edge with nonpositive transmissibility");
    sys.mass[k] = ge.length / ge.transmissibility;
    const double sign = ge.side == InterfaceSide::Minus ? 1.0 : -1.0;
    entries.emplace_back(local(ge.cell), k, sign * ge.length);
  }
  sys.div.resize(ncell, nu);
  sys.div.setFromTriplets(entries.begin(), entries.end());
  return sys;
}

}  // namespace

SubdomainProblem::SubdomainProblem(const Discretization& disc, const Eigen::VectorXd& mass, int block,
                                   std::vector<GhostEdge> ghosts)
    : block_(block),
      cell_offset_(disc.mesh.cell_offset(block)),
      ghosts_(std::move(ghosts)),
      system_([&] {
        LocalSystem sys = build_local(disc, mass, block, ghosts_);
        owned_ = std::move(sys.owned);
        return FactoredMixedSystem(std::move(sys.mass), std::move(sys.div));
      }()) {}

SubdomainProblem::Result SubdomainProblem::solve(const LoadVectors& load, const Eigen::VectorXd& ghost_values,
                                                 double tol) const {
  if (ghost_values.size() != static_cast<int>(ghosts_.size())) throw std::invalid_argument("ghost value count");
  const int nowned = static_cast<int>(owned_.size());
  const int ncell = system_.schur().rows();
  Eigen::VectorXd bu(nowned + static_cast<int>(ghosts_.size()));
  for (int k = 0; k < nowned; ++k) bu[k] = load.velocity[owned_[k]];
  for (std::size_t g = 0; g < ghosts_.size(); ++g) {
    const double sign = ghosts_[g].side == InterfaceSide::Minus ? 1.0 : -1.0;
    bu[nowned + static_cast<int>(g)] = -ghost_values[static_cast<int>(g)] * ghosts_[g].length * sign;
  }
  const Eigen::VectorXd bp = load.pressure.segment(cell_offset_, ncell);
  MixedSolution s = system_.solve(bu, bp, tol);
  return {std::move(s.p), s.u.head(nowned), s.u.tail(static_cast<int>(ghosts_.size()))};
}

std::vector<SubdomainProblem::GhostEdge> block_ghost_edges(const Discretization& disc, int block,
                                                           const std::vector<InterfaceOperators>& ops,
                                                           const std::vector<TraceProjection>& minus_proj,
                                                           const std::vector<TraceProjection>& plus_proj) {
  std::vector<SubdomainProblem::GhostEdge> ghosts;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& iface = disc.trace.interfaces[i];
    for (InterfaceSide side : {InterfaceSide::Minus, InterfaceSide::Plus}) {
      const int owner = side == InterfaceSide::Minus ? iface.minus_block : iface.plus_block;
      if (owner != block) continue;
      const auto& proj = side == InterfaceSide::Minus ? minus_proj[i] : plus_proj[i];
      const Eigen::VectorXd tau = ghost_transmissibility(ops[i], proj);
      for (int k = 0; k < static_cast<int>(proj.cells.size()); ++k) {
        ghosts.push_back({static_cast<int>(i), side, k, proj.cells[k], proj.lengths[k], tau[k]});
      }
    }
  }
  return ghosts;
}

BlockJacobiResult block_jacobi_solve(const ManufacturedCase& mfg, const Discretization& disc, double tol,
                                     int max_iter, int threads) {
  if (!(tol > 0.0) || max_iter < 1) throw std::invalid_argument("block-Jacobi needs tol > 0 and max_iter >= 1");
  const auto mass = assemble_velocity_mass(disc.mesh, disc.dofs, mfg.perm);
  const auto load = assemble_rhs(mfg, disc.mesh, disc.dofs);
  const auto ops = interface_operators(disc, mass);
  std::vector<TraceProjection> minus_proj, plus_proj;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    minus_proj.push_back(trace_projection(disc, static_cast<int>(i), InterfaceSide::Minus));
    plus_proj.push_back(trace_projection(disc, static_cast<int>(i), InterfaceSide::Plus));
  }
  std::vector<SubdomainProblem> blocks;
  for (int b = 0; b < disc.mesh.num_blocks(); ++b) {
    blocks.emplace_back(disc, mass, b, block_ghost_edges(disc, b, ops, minus_proj, plus_proj));
  }

  auto interface_fluxes = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd flux(static_cast<int>(disc.trace.sub_edges.size()));
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Eigen::VectorXd u = ops[i].a1 * layer_values(p, ops[i].minus_layer) +
                                ops[i].a2 * layer_values(p, ops[i].plus_layer);
      const auto& subs = disc.trace.interfaces[i].sub_edges;
      for (std::size_t r = 0; r < subs.size(); ++r) flux[subs[r]] = u[static_cast<int>(r)];
    }
    return flux;
  };

  BlockJacobiResult result;
  // Start from the mean Dirichlet value, which is exact for constant data.
  double g_sum = 0.0, g_len = 0.0;
  for (const auto& v : disc.dofs.velocity_dofs()) {
    if (v.kind != DofKind::Boundary) continue;
    g_sum += mfg.boundary(v.midpoint) * v.length;
    g_len += v.length;
  }
  Eigen::VectorXd p = Eigen::VectorXd::Constant(disc.mesh.num_cells(), g_len > 0.0 ? g_sum / g_len : 0.0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(disc.dofs.num_velocity());
  Eigen::VectorXd previous = interface_fluxes(p);
  const bool parallel = threads > 1;

  for (int it = 1; it <= max_iter; ++it) {
    std::vector<GhostPressures> ghost(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      ghost[i] = ghost_pressures(layer_values(p, ops[i].minus_layer), layer_values(p, ops[i].plus_layer), ops[i],
                                 minus_proj[i], plus_proj[i]);
    }
    auto solve_block = [&](int b) {
      const auto& prob = blocks[b];
      Eigen::VectorXd values(static_cast<int>(prob.ghosts().size()));
      for (std::size_t g = 0; g < prob.ghosts().size(); ++g) {
        const auto& ge = prob.ghosts()[g];
        const auto& gp = ge.side == InterfaceSide::Minus ? ghost[ge.interface].minus : ghost[ge.interface].plus;
        values[static_cast<int>(g)] = gp[ge.element];
      }
      return prob.solve(load, values);
    };

    std::vector<SubdomainProblem::Result> solved(blocks.size());
    const std::size_t width = parallel ? static_cast<std::size_t>(threads) : 1;
    for (std::size_t start = 0; start < blocks.size(); start += width) {
      std::vector<std::future<SubdomainProblem::Result>> batch;
      for (std::size_t b = start; b < std::min(blocks.size(), start + width); ++b) {
        batch.push_back(std::async(parallel ? std::launch::async : std::launch::deferred,
                                   [&solve_block, b] { return solve_block(static_cast<int>(b)); }));
      }
      for (std::size_t k = 0; k < batch.size(); ++k) solved[start + k] = batch[k].get();
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const int offset = disc.mesh.cell_offset(static_cast<int>(b));
      p.segment(offset, solved[b].p.size()) = solved[b].p;
      const auto& owned = blocks[b].owned_dofs();
      for (std::size_t k = 0; k < owned.size(); ++k) u[owned[k]] = solved[b].u[static_cast<int>(k)];
    }

    const Eigen::VectorXd current = interface_fluxes(p);
    const double change = (current - previous).norm();
    result.history.push_back(change);
    previous = current;
    if (change < tol) {
      for (int e = 0; e < current.size(); ++e) u[disc.dofs.sub_edge_dof(e)] = current[e];
      result.solution = {std::move(u), std::move(p)};
      result.iterations = it;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "block-Jacobi did not converge in " << max_iter << " sweeps; last interface flux change "
      << result.history.back();
  throw ConvergenceFailure(msg.str(), std::move(result.history));
}

}  // namespace evflow
