#include "evflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace evflow {

namespace {

double rel_tol(const Rect& r) { return 1e-12 * std::max(r.width(), r.height()); }

/// Sorted breakpoints clipped to [t0, t1]; points closer than tol merge and
/// the endpoints are kept exact.
std::vector<double> merge_breakpoints(std::vector<double> pts, double t0, double t1, double tol) {
  pts.push_back(t0);
  pts.push_back(t1);
  std::vector<double> inside;
  for (double t : pts) {
    if (t >= t0 - tol && t <= t1 + tol) inside.push_back(std::clamp(t, t0, t1));
  }
  std::sort(inside.begin(), inside.end());
  std::vector<double> out{t0};
  for (double t : inside) {
    if (t - out.back() > tol) out.push_back(t);
  }
  if (t1 - out.back() <= tol) out.back() = t1;
  else out.push_back(t1);
  return out;
}

Point on_line(Axis normal, double coord, double t) {
  return normal == Axis::X ? Point{coord, t} : Point{t, coord};
}

}  // namespace

SubdomainGrid::SubdomainGrid(int id, Rect extent, int nx, int ny)
    : id_(id), extent_(extent), nx_(nx), ny_(ny) {
  if (!(extent.x0 < extent.x1) || !(extent.y0 < extent.y1)) {
    throw std::invalid_argument("block " + std::to_string(id) + ": empty extent");
  }
  if (nx < 1 || ny < 1) {
    throw std::invalid_argument("block " + std::to_string(id) + ": cell counts must be positive");
  }
  hx_ = extent.width() / nx;
  hy_ = extent.height() / ny;
}

Point SubdomainGrid::cell_center(int i, int j) const {
  return {extent_.x0 + (i + 0.5) * hx_, extent_.y0 + (j + 0.5) * hy_};
}

int SubdomainGrid::locate_column(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - extent_.x0) / hx_)), 0, nx_ - 1);
}

int SubdomainGrid::locate_row(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - extent_.y0) / hy_)), 0, ny_ - 1);
}

std::vector<double> SubdomainGrid::grid_lines(Axis tangential) const {
  std::vector<double> lines;
  if (tangential == Axis::X) {
    for (int i = 0; i <= nx_; ++i) lines.push_back(extent_.x0 + i * hx_);
    lines.back() = extent_.x1;
  } else {
    for (int j = 0; j <= ny_; ++j) lines.push_back(extent_.y0 + j * hy_);
    lines.back() = extent_.y1;
  }
  return lines;
}

MultiblockMesh::MultiblockMesh(std::vector<SubdomainGrid> blocks, std::vector<BlockAdjacency> adjacency,
                               Rect domain, std::string layout)
    : blocks_(std::move(blocks)), adjacency_(std::move(adjacency)), domain_(domain), layout_(std::move(layout)) {
  cell_offset_.push_back(0);
  for (const auto& b : blocks_) cell_offset_.push_back(cell_offset_.back() + b.num_cells());
}

int MultiblockMesh::block_of(int cell) const {
  auto it = std::upper_bound(cell_offset_.begin(), cell_offset_.end(), cell);
  return static_cast<int>(it - cell_offset_.begin()) - 1;
}

Point MultiblockMesh::cell_center(int cell) const {
  const int b = block_of(cell);
  const auto [i, j] = blocks_[b].cell_ij(cell - cell_offset_[b]);
  return blocks_[b].cell_center(i, j);
}

double MultiblockMesh::cell_area(int cell) const {
  const auto& g = blocks_[block_of(cell)];
  return g.hx() * g.hy();
}

bool MultiblockMesh::on_domain_boundary(Point p) const {
  const double tol = rel_tol(domain_);
  return std::abs(p.x - domain_.x0) <= tol || std::abs(p.x - domain_.x1) <= tol ||
         std::abs(p.y - domain_.y0) <= tol || std::abs(p.y - domain_.y1) <= tol;
}

MultiblockMesh build_multiblock(const std::vector<BlockSpec>& specs, std::string layout) {
  if (specs.empty()) throw std::invalid_argument("layout has no blocks");

  std::vector<SubdomainGrid> blocks;
  Rect box = specs.front().extent;
  for (std::size_t b = 0; b < specs.size(); ++b) {
    blocks.emplace_back(static_cast<int>(b), specs[b].extent, specs[b].nx, specs[b].ny);
    const Rect& r = specs[b].extent;
    box = {std::min(box.x0, r.x0), std::max(box.x1, r.x1), std::min(box.y0, r.y0), std::max(box.y1, r.y1)};
  }
  const double tol = rel_tol(box);

  double area = 0.0;
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    const Rect& ra = blocks[a].extent();
    area += ra.area();
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      const Rect& rb = blocks[b].extent();
      const double ox = std::min(ra.x1, rb.x1) - std::max(ra.x0, rb.x0);
      const double oy = std::min(ra.y1, rb.y1) - std::max(ra.y0, rb.y0);
      if (ox > tol && oy > tol) {
        throw std::invalid_argument("non-tiling layout: blocks " + std::to_string(a) + " and " +
                                    std::to_string(b) + " overlap");
      }
    }
  }
  if (std::abs(area - box.area()) > 1e-12 * box.area()) {
    throw std::invalid_argument("non-tiling layout: blocks do not cover their bounding box");
  }

  std::vector<BlockAdjacency> adjacency;
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (a == b) continue;
      const Rect& ra = blocks[a].extent();
      const Rect& rb = blocks[b].extent();
      if (std::abs(ra.x1 - rb.x0) <= tol) {
        const double t0 = std::max(ra.y0, rb.y0);
        const double t1 = std::min(ra.y1, rb.y1);
        if (t1 - t0 > tol) {
          adjacency.push_back({static_cast<int>(a), static_cast<int>(b), Axis::X, ra.x1, t0, t1});
        }
      }
      if (std::abs(ra.y1 - rb.y0) <= tol) {
        const double t0 = std::max(ra.x0, rb.x0);
        const double t1 = std::min(ra.x1, rb.x1);
        if (t1 - t0 > tol) {
          adjacency.push_back({static_cast<int>(a), static_cast<int>(b), Axis::Y, ra.y1, t0, t1});
        }
      }
    }
  }
  return MultiblockMesh(std::move(blocks), std::move(adjacency), box, std::move(layout));
}

MultiblockMesh build_checkerboard(int n, int ratio) {
  if (n < 1 || ratio < 1) throw std::invalid_argument("checkerboard: n and ratio must be positive");
  if (n % ratio != 0) {
    throw std::invalid_argument(std::to_string(n) + " not divisible by " + std::to_string(ratio));
  }
  const int coarse = n / ratio;
  std::vector<BlockSpec> specs{
      {{0.0, 0.5, 0.0, 0.5}, n, n},
      {{0.5, 1.0, 0.0, 0.5}, coarse, coarse},
      {{0.0, 0.5, 0.5, 1.0}, coarse, coarse},
      {{0.5, 1.0, 0.5, 1.0}, n, n},
  };
  return build_multiblock(specs, "checkerboard2x2");
}

InterfaceMesh compute_interface_trace(const MultiblockMesh& mesh) {
  InterfaceMesh out;
  for (const auto& adj : mesh.adjacency()) {
    const auto& minus = mesh.block(adj.minus);
    const auto& plus = mesh.block(adj.plus);
    const Axis tangential = adj.normal == Axis::X ? Axis::Y : Axis::X;

    std::vector<double> pts = minus.grid_lines(tangential);
    const auto plus_lines = plus.grid_lines(tangential);
    pts.insert(pts.end(), plus_lines.begin(), plus_lines.end());
    const auto breaks = merge_breakpoints(std::move(pts), adj.t0, adj.t1, 1e-12 * (adj.t1 - adj.t0));

    Interface iface{adj.minus, adj.plus, adj.normal, adj.coord, adj.t0, adj.t1, {}};
    const int id = static_cast<int>(out.interfaces.size());
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      SubEdge e;
      e.interface = id;
      e.normal = adj.normal;
      e.coord = adj.coord;
      e.t0 = breaks[k];
      e.t1 = breaks[k + 1];
      e.length = e.t1 - e.t0;
      const double tm = 0.5 * (e.t0 + e.t1);
      e.midpoint = on_line(adj.normal, adj.coord, tm);
      if (adj.normal == Axis::X) {
        e.minus_cell = mesh.global_cell(adj.minus, minus.nx() - 1, minus.locate_row(tm));
        e.plus_cell = mesh.global_cell(adj.plus, 0, plus.locate_row(tm));
      } else {
        e.minus_cell = mesh.global_cell(adj.minus, minus.locate_column(tm), minus.ny() - 1);
        e.plus_cell = mesh.global_cell(adj.plus, plus.locate_column(tm), 0);
      }
      iface.sub_edges.push_back(static_cast<int>(out.sub_edges.size()));
      out.sub_edges.push_back(e);
    }
    out.interfaces.push_back(std::move(iface));
  }
  return out;
}

DofMap::DofMap(std::vector<VelocityDof> velocity, std::vector<std::array<std::vector<int>, 4>> cell_sides,
               std::vector<int> sub_edge_dof, int num_pressure)
    : velocity_(std::move(velocity)),
      cell_sides_(std::move(cell_sides)),
      sub_edge_dof_(std::move(sub_edge_dof)),
      num_pressure_(num_pressure) {}

DofMap enumerate_dofs(const MultiblockMesh& mesh, const InterfaceMesh& trace) {
  std::vector<VelocityDof> dofs;
  const double tol = rel_tol(mesh.domain());

  for (int b = 0; b < mesh.num_blocks(); ++b) {
    const auto& g = mesh.block(b);
    const Rect& r = g.extent();
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 1; i < g.nx(); ++i) {
        dofs.push_back({DofKind::Interior, Axis::X, {r.x0 + i * g.hx(), r.y0 + (j + 0.5) * g.hy()}, g.hy(),
                        mesh.global_cell(b, i - 1, j), mesh.global_cell(b, i, j), -1});
      }
    }
    for (int j = 1; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        dofs.push_back({DofKind::Interior, Axis::Y, {r.x0 + (i + 0.5) * g.hx(), r.y0 + j * g.hy()}, g.hx(),
                        mesh.global_cell(b, i, j - 1), mesh.global_cell(b, i, j), -1});
      }
    }

    // Block sides: whatever is not covered by an interface lies on the outer boundary.
    for (Side s : kSides) {
      const Axis normal = side_axis(s);
      const Axis tangential = normal == Axis::X ? Axis::Y : Axis::X;
      const double coord = normal == Axis::X ? (s == Side::Left ? r.x0 : r.x1) : (s == Side::Bottom ? r.y0 : r.y1);
      const double t0 = tangential == Axis::Y ? r.y0 : r.x0;
      const double t1 = tangential == Axis::Y ? r.y1 : r.x1;

      std::vector<std::array<double, 2>> covered;
      std::vector<double> pts = g.grid_lines(tangential);
      for (const auto& iface : trace.interfaces) {
        const bool mine = (side_sign(s) > 0 && iface.minus_block == b) || (side_sign(s) < 0 && iface.plus_block == b);
        if (iface.normal != normal || !mine || std::abs(iface.coord - coord) > tol) continue;
        covered.push_back({iface.t0, iface.t1});
        pts.push_back(iface.t0);
        pts.push_back(iface.t1);
      }
      const auto breaks = merge_breakpoints(std::move(pts), t0, t1, 1e-12 * (t1 - t0));
      for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double tm = 0.5 * (breaks[k] + breaks[k + 1]);
        const bool is_interface = std::any_of(covered.begin(), covered.end(),
                                              [&](const auto& c) { return tm > c[0] && tm < c[1]; });
        if (is_interface) continue;
        const Point mid = on_line(normal, coord, tm);
        if (!mesh.on_domain_boundary(mid)) {
          throw std::invalid_argument("non-tiling layout: block " + std::to_string(b) +
                                      " has an uncovered internal side");
        }
        int cell = normal == Axis::X ? mesh.global_cell(b, s == Side::Left ? 0 : g.nx() - 1, g.locate_row(tm))
                                     : mesh.global_cell(b, g.locate_column(tm), s == Side::Bottom ? 0 : g.ny() - 1);
        VelocityDof d{DofKind::Boundary, normal, mid, breaks[k + 1] - breaks[k], -1, -1, -1};
        (side_sign(s) > 0 ? d.minus_cell : d.plus_cell) = cell;
        dofs.push_back(d);
      }
    }
  }

  std::vector<int> sub_edge_dof(trace.sub_edges.size());
  for (std::size_t e = 0; e < trace.sub_edges.size(); ++e) {
    const auto& se = trace.sub_edges[e];
    sub_edge_dof[e] = static_cast<int>(dofs.size());
    dofs.push_back({DofKind::Interface, se.normal, se.midpoint, se.length, se.minus_cell, se.plus_cell,
                    static_cast<int>(e)});
  }

  std::vector<std::array<std::vector<int>, 4>> sides(mesh.num_cells());
  for (std::size_t d = 0; d < dofs.size(); ++d) {
    const auto& v = dofs[d];
    const bool vertical = v.normal == Axis::X;
    if (v.minus_cell >= 0) sides[v.minus_cell][static_cast<int>(vertical ? Side::Right : Side::Top)].push_back(d);
    if (v.plus_cell >= 0) sides[v.plus_cell][static_cast<int>(vertical ? Side::Left : Side::Bottom)].push_back(d);
  }
  for (auto& cell : sides) {
    for (int s = 0; s < 4; ++s) {
      const Axis tangential = side_axis(static_cast<Side>(s)) == Axis::X ? Axis::Y : Axis::X;
      std::sort(cell[s].begin(), cell[s].end(), [&](int a, int b) {
        return component(dofs[a].midpoint, tangential) < component(dofs[b].midpoint, tangential);
      });
    }
  }
  const int np = mesh.num_cells();
  return DofMap(std::move(dofs), std::move(sides), std::move(sub_edge_dof), np);
}

Discretization discretize(MultiblockMesh mesh) {
  InterfaceMesh trace = compute_interface_trace(mesh);
  DofMap dofs = enumerate_dofs(mesh, trace);
  return {std::move(mesh), std::move(trace), std::move(dofs)};
}

}  // namespace evflow
