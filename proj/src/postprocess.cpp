#include "evflow/postprocess.hpp"

#include <algorithm>
#include <cmath>

namespace evflow {

namespace {

// Q2 Lagrange basis on [-1, 1] with nodes -1, 0, 1.
std::array<double, 3> lagrange3(double t) { return {0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)}; }

Vec2 unit(Axis a) { return a == Axis::X ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0}; }

// Field value at p, interpolated in `cell` (p may sit on the cell boundary).
double sample_in_cell(const NodalQ2Field& field, const MultiblockMesh& mesh, int cell, Point p) {
  const int b = mesh.block_of(cell);
  const auto& g = mesh.block(b);
  const auto [i, j] = g.cell_ij(cell - mesh.cell_offset(b));
  const Point c = g.cell_center(i, j);
  return field.evaluate_in_cell(i, j, (p.x - c.x) / (0.5 * g.hx()), (p.y - c.y) / (0.5 * g.hy()));
}

}  // namespace

double LocalPoly5::edge_average(Side s) const {
  switch (s) {
    case Side::Left: return c[0] - c[1] + c[3] + c[4] / 3.0;
    case Side::Right: return c[0] + c[1] + c[3] + c[4] / 3.0;
    case Side::Bottom: return c[0] - c[2] + c[3] / 3.0 + c[4];
    case Side::Top: return c[0] + c[2] + c[3] / 3.0 + c[4];
  }
  return 0.0;
}

LocalPoly5 fit_local_poly5(double mean, const std::array<double, 4>& edges) {
  const double left = edges[0], right = edges[1], bottom = edges[2], top = edges[3];
  // Odd parts decouple; the even parts follow from the x- and y-edge means
  // minus the cell mean: mx - mean = 2 c3 / 3, my - mean = 2 c4 / 3.
  LocalPoly5 poly;
  poly.c[1] = 0.5 * (right - left);
  poly.c[2] = 0.5 * (top - bottom);
  poly.c[3] = 1.5 * (0.5 * (right + left) - mean);
  poly.c[4] = 1.5 * (0.5 * (top + bottom) - mean);
  poly.c[0] = mean - (poly.c[3] + poly.c[4]) / 3.0;
  return poly;
}

EdgeMultipliers compute_lagrange_multipliers(const MixedSolution& sol, const PermField& perm,
                                             const MultiblockMesh& mesh, const DofMap& dofs) {
  EdgeMultipliers lambda;
  lambda.values.resize(mesh.num_cells());
  for (int cell = 0; cell < mesh.num_cells(); ++cell) {
    const Point center = mesh.cell_center(cell);
    for (Side s : kSides) {
      const Axis a = side_axis(s);
      double flux = 0.0;
      double length = 0.0;
      for (int d : dofs.side_dofs(cell, s)) {
        flux += sol.u[d] * dofs.velocity(d).length;
        length += dofs.velocity(d).length;
      }
      const double un = side_sign(s) * flux / length;
      const double half = 0.5 * mesh.cell_width(cell, a);
      Point edge_mid = center;
      (a == Axis::X ? edge_mid.x : edge_mid.y) += side_sign(s) * half;
      lambda.values[cell][static_cast<int>(s)] = sol.p[cell] - un * half / perm(edge_mid).along(a);
    }
  }
  return lambda;
}

std::vector<LocalPoly5> postprocess_pressure(const Eigen::VectorXd& p, const EdgeMultipliers& lambda) {
  std::vector<LocalPoly5> out(lambda.values.size());
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = fit_local_poly5(p[c], lambda.values[c]);
  return out;
}

double max_constraint_residual(const std::vector<LocalPoly5>& poly, const Eigen::VectorXd& p,
                               const EdgeMultipliers& lambda) {
  double worst = 0.0;
  for (std::size_t c = 0; c < poly.size(); ++c) {
    worst = std::max(worst, std::abs(poly[c].mean() - p[c]));
    for (Side s : kSides) worst = std::max(worst, std::abs(poly[c].edge_average(s) - lambda(c, s)));
  }
  return worst;
}

NodalQ2Field::NodalQ2Field(SubdomainGrid grid)
    : grid_(std::move(grid)), values_(static_cast<std::size_t>(nodes_x()) * nodes_y(), 0.0) {}

Point NodalQ2Field::node_position(int a, int b) const {
  const Rect& r = grid_.extent();
  return {a == nodes_x() - 1 ? r.x1 : r.x0 + 0.5 * a * grid_.hx(),
          b == nodes_y() - 1 ? r.y1 : r.y0 + 0.5 * b * grid_.hy()};
}

double NodalQ2Field::evaluate_in_cell(int i, int j, double xi, double eta) const {
  const auto lx = lagrange3(xi);
  const auto ly = lagrange3(eta);
  double v = 0.0;
  for (int b = 0; b < 3; ++b) {
    for (int a = 0; a < 3; ++a) v += lx[a] * ly[b] * node(2 * i + a, 2 * j + b);
  }
  return v;
}

double NodalQ2Field::evaluate(Point p) const {
  const int i = grid_.locate_column(p.x);
  const int j = grid_.locate_row(p.y);
  const Point c = grid_.cell_center(i, j);
  return evaluate_in_cell(i, j, (p.x - c.x) / (0.5 * grid_.hx()), (p.y - c.y) / (0.5 * grid_.hy()));
}

NodalQ2Field oswald_average(const std::vector<LocalPoly5>& poly, const MultiblockMesh& mesh, int block,
                            const std::function<double(Point)>& boundary) {
  const auto& g = mesh.block(block);
  NodalQ2Field field(g);
  std::vector<int> count(field.values().size(), 0);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const auto& local = poly[mesh.global_cell(block, i, j)];
      for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
          field.node(2 * i + a, 2 * j + b) += local(a - 1.0, b - 1.0);
          ++count[(2 * i + a) + field.nodes_x() * (2 * j + b)];
        }
      }
    }
  }
  for (int b = 0; b < field.nodes_y(); ++b) {
    for (int a = 0; a < field.nodes_x(); ++a) {
      const Point x = field.node_position(a, b);
      if (mesh.on_domain_boundary(x)) {
        field.node(a, b) = boundary(x);
      } else {
        field.node(a, b) /= count[a + field.nodes_x() * b];
      }
    }
  }
  return field;
}

double two_point_flux(double s_minus, double s_plus, double d_minus, double d_plus, double k_minus, double k_plus) {
  return -(s_plus - s_minus) / (d_minus / k_minus + d_plus / k_plus);
}

RecoveredFlux recover_interface_velocity(const std::vector<NodalQ2Field>& fields, const PermField& perm,
                                         const MultiblockMesh& mesh, const InterfaceMesh& trace,
                                         TwoPointStencil stencil) {
  RecoveredFlux out{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(trace.sub_edges.size()))};
  for (std::size_t e = 0; e < trace.sub_edges.size(); ++e) {
    const auto& se = trace.sub_edges[e];
    const Vec2 n = unit(se.normal);
    const double h_minus = mesh.cell_width(se.minus_cell, se.normal);
    const double h_plus = mesh.cell_width(se.plus_cell, se.normal);
    double d_minus = 0.5 * h_minus;
    double d_plus = 0.5 * h_plus;
    if (stencil == TwoPointStencil::SubEdgeSymmetric) {
      d_minus = d_plus = std::min({0.5 * se.length, h_minus, h_plus});
    }
    const Point x_minus{se.midpoint.x - d_minus * n.x, se.midpoint.y - d_minus * n.y};
    const Point x_plus{se.midpoint.x + d_plus * n.x, se.midpoint.y + d_plus * n.y};
    const double s_minus = sample_in_cell(fields[mesh.block_of(se.minus_cell)], mesh, se.minus_cell, x_minus);
    const double s_plus = sample_in_cell(fields[mesh.block_of(se.plus_cell)], mesh, se.plus_cell, x_plus);
    out.values[static_cast<Eigen::Index>(e)] =
        two_point_flux(s_minus, s_plus, d_minus, d_plus, perm(x_minus).along(se.normal), perm(x_plus).along(se.normal));
  }
  return out;
}

PostFields run_postprocess(const Discretization& disc, const MixedSolution& sol, const ManufacturedCase& mfg,
                           TwoPointStencil stencil) {
  PostFields post;
  post.lambda = compute_lagrange_multipliers(sol, mfg.perm, disc.mesh, disc.dofs);
  post.poly = postprocess_pressure(sol.p, post.lambda);
  const auto g = [&mfg](Point x) { return mfg.boundary(x); };
  for (int b = 0; b < disc.mesh.num_blocks(); ++b) post.smooth.push_back(oswald_average(post.poly, disc.mesh, b, g));
  post.recovered = recover_interface_velocity(post.smooth, mfg.perm, disc.mesh, disc.trace, stencil);
  return post;
}

}  // namespace evflow
