#include "evflow/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "evflow/interface_coupling.hpp"
#include "evflow/output.hpp"

namespace evflow {

DdComparison compare_dd(const ManufacturedCase& mfg, const Discretization& disc, double solver_tol, double dd_tol,
                        int max_iter, int threads) {
  const MixedSolution mono = solve_case(mfg, disc, solver_tol);
  const BlockJacobiResult dd = block_jacobi_solve(mfg, disc, dd_tol, max_iter, threads);
  DdComparison cmp;
  cmp.max_dp = (mono.p - dd.solution.p).lpNorm<Eigen::Infinity>();
  cmp.max_du = (mono.u - dd.solution.u).lpNorm<Eigen::Infinity>();
  cmp.iterations = dd.iterations;
  cmp.last_change = dd.history.back();
  return cmp;
}

namespace {

int level_of(const RunConfig& cfg, std::ostream& err) {
  if (cfg.explicit_layout()) return 0;
  if (cfg.levels.size() != 1) {
    err << "this command takes a single level; pass --n or a one-element \"levels\"\n";
    return -1;
  }
  return cfg.levels.front();
}

int solve(const RunConfig& cfg, const CommandContext& ctx) {
  const int n = level_of(cfg, *ctx.err);
  if (n < 0) return 2;
  const ManufacturedCase mfg = cfg.make_case();
  const Discretization disc = discretize(cfg.make_mesh(n));
  MixedSolution sol;
  int sweeps = 0;
  if (cfg.block_jacobi) {
    auto dd = block_jacobi_solve(mfg, disc, cfg.dd_tol, cfg.dd_max_iter, ctx.threads);
    sol = std::move(dd.solution);
    sweeps = dd.iterations;
  } else {
    sol = solve_case(mfg, disc, cfg.study.tol);
  }
  const PostFields post = run_postprocess(disc, sol, mfg, cfg.study.stencil);

  std::vector<double> raw(disc.trace.sub_edges.size());
  for (std::size_t e = 0; e < raw.size(); ++e) raw[e] = sol.u[disc.dofs.sub_edge_dof(static_cast<int>(e))];
  const std::span<const double> rec(post.recovered.values.data(),
                                    static_cast<std::size_t>(post.recovered.values.size()));

  auto& out = *ctx.out;
  out << "case " << mfg.name << ", layout " << disc.mesh.layout();
  if (!cfg.explicit_layout()) out << ", n " << n;
  out << "\n";
  out << "blocks " << disc.mesh.num_blocks() << ", cells " << disc.mesh.num_cells() << ", velocity unknowns "
      << disc.dofs.num_velocity() << ", interface sub-edges " << disc.trace.sub_edges.size() << "\n";
  if (cfg.block_jacobi) out << "block-Jacobi sweeps " << sweeps << "\n";
  out << "e_u " << format_sci(interface_velocity_error(raw, disc.trace, mfg, cfg.study.weighted)) << "\n";
  out << "e_rec " << format_sci(interface_velocity_error(rec, disc.trace, mfg, cfg.study.weighted)) << "\n";
  out << "mass residual " << format_sci(residual_mass_conservation(sol, mfg, disc.mesh, disc.dofs)) << "\n";
  out << "constraint residual " << format_sci(max_constraint_residual(post.poly, sol.p, post.lambda)) << "\n";

  if (!cfg.vtk.empty()) {
    for (const auto& path : write_vtk_fields(cfg.vtk, disc, sol, post)) out << "wrote " << path << "\n";
  }
  return 0;
}

int convergence(const RunConfig& cfg, const CommandContext& ctx) {
  if (cfg.explicit_layout()) {
    *ctx.err << "convergence studies need the checkerboard2x2 layout\n";
    return 2;
  }
  StudyOptions opts = cfg.study;
  opts.threads = ctx.threads;
  const ConvergenceStudy study = convergence_study(cfg.make_case(), cfg.levels, opts);
  if (cfg.csv.empty()) {
    write_convergence_csv(*ctx.out, study.rows);
    return 0;
  }
  const auto parent = std::filesystem::path(cfg.csv).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream file(cfg.csv, std::ios::binary);
  if (!file) {
    *ctx.err << "cannot open " << cfg.csv << " for writing\n";
    return 1;
  }
  write_convergence_csv(file, study.rows);
  if (!file) {
    *ctx.err << "write failed for " << cfg.csv << "\n";
    return 1;
  }
  *ctx.out << "wrote " << cfg.csv << "\n";
  return 0;
}

int compare(const RunConfig& cfg, const CommandContext& ctx) {
  const int n = level_of(cfg, *ctx.err);
  if (n < 0) return 2;
  const Discretization disc = discretize(cfg.make_mesh(n));
  const DdComparison cmp =
      compare_dd(cfg.make_case(), disc, cfg.study.tol, cfg.dd_tol, cfg.dd_max_iter, ctx.threads);
  auto& out = *ctx.out;
  out << "block-Jacobi sweeps " << cmp.iterations << " (last interface flux change " << format_sci(cmp.last_change)
      << ")\n";
  out << "max |p_dd - p| " << format_sci(cmp.max_dp) << "\n";
  out << "max |u_dd - u| " << format_sci(cmp.max_du) << "\n";
  out << "discrepancy " << format_sci(cmp.discrepancy()) << "\n";
  return 0;
}

}  // namespace

int run_command(const std::string& command, const RunConfig& cfg, const CommandContext& ctx) {
  try {
    if (command == "solve") return solve(cfg, ctx);
    if (command == "convergence") return convergence(cfg, ctx);
    if (command == "compare-dd") return compare(cfg, ctx);
    *ctx.err << "unknown command \"" << command << "\"\n";
    return 2;
  } catch (const std::exception& e) {
    *ctx.err << command << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace evflow
