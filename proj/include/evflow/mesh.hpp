#pragma once

/// @file mesh.hpp
/// @brief Multiblock Cartesian meshes with non-matching interfaces.
///
/// A domain is tiled by axis-aligned rectangular blocks, each carrying its own
/// uniform grid. Where two blocks share a segment the two edge traces are
/// intersected into a 1D interface mesh of sub-edges; each sub-edge later
/// carries a single normal-flux unknown shared by both sides.

#include <array>
#include <string>
#include <vector>

namespace evflow {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};
using Point = Vec2;

/// Normal direction of an edge: X for vertical edges, Y for horizontal ones.
enum class Axis : int { X = 0, Y = 1 };

inline constexpr double component(const Vec2& v, Axis a) { return a == Axis::X ? v.x : v.y; }

/// Local side of a rectangular cell or block.
enum class Side : int { Left = 0, Right = 1, Bottom = 2, Top = 3 };

inline constexpr std::array<Side, 4> kSides{Side::Left, Side::Right, Side::Bottom, Side::Top};
inline constexpr Axis side_axis(Side s) { return (s == Side::Left || s == Side::Right) ? Axis::X : Axis::Y; }
/// +1 when the outward normal of the side points along +axis.
inline constexpr int side_sign(Side s) { return (s == Side::Right || s == Side::Top) ? 1 : -1; }

struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

class SubdomainGrid {
 public:
  SubdomainGrid(int id, Rect extent, int nx, int ny);

  int id() const { return id_; }
  const Rect& extent() const { return extent_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  /// Cell width normal to an edge of the given axis.
  double h(Axis normal) const { return normal == Axis::X ? hx_ : hy_; }
  int num_cells() const { return nx_ * ny_; }

  int cell_index(int i, int j) const { return i + nx_ * j; }
  std::array<int, 2> cell_ij(int local) const { return {local % nx_, local / nx_}; }
  Point cell_center(int i, int j) const;

  /// Column/row containing a coordinate, clamped to the grid.
  int locate_column(double x) const;
  int locate_row(double y) const;

  /// Grid line coordinates along the tangential direction of a side.
  std::vector<double> grid_lines(Axis tangential) const;

 private:
  int id_;
  Rect extent_;
  int nx_, ny_;
  double hx_, hy_;
};

/// Two blocks sharing a segment of positive length. `minus` lies on the
/// negative side of the shared line with respect to `normal`.
struct BlockAdjacency {
  int minus = -1;
  int plus = -1;
  Axis normal = Axis::X;
  double coord = 0.0;  ///< position of the shared line
  double t0 = 0.0;     ///< segment start, tangential coordinate
  double t1 = 0.0;
};

struct BlockSpec {
  Rect extent;
  int nx = 1;
  int ny = 1;
};

class MultiblockMesh {
 public:
  MultiblockMesh(std::vector<SubdomainGrid> blocks, std::vector<BlockAdjacency> adjacency, Rect domain,
                 std::string layout);

  const std::vector<SubdomainGrid>& blocks() const { return blocks_; }
  const SubdomainGrid& block(int b) const { return blocks_.at(b); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<BlockAdjacency>& adjacency() const { return adjacency_; }
  const Rect& domain() const { return domain_; }
  const std::string& layout() const { return layout_; }

  int num_cells() const { return cell_offset_.back(); }
  int cell_offset(int block) const { return cell_offset_[block]; }
  int global_cell(int block, int i, int j) const { return cell_offset_[block] + blocks_[block].cell_index(i, j); }
  int block_of(int cell) const;
  Point cell_center(int cell) const;
  double cell_area(int cell) const;
  /// Width of a cell normal to an edge with the given normal axis.
  double cell_width(int cell, Axis normal) const { return blocks_[block_of(cell)].h(normal); }

  bool on_domain_boundary(Point p) const;

 private:
  std::vector<SubdomainGrid> blocks_;
  std::vector<BlockAdjacency> adjacency_;
  std::vector<int> cell_offset_;
  Rect domain_;
  std::string layout_;
};

/// Builds a mesh from block rectangles. Throws std::invalid_argument when the
/// blocks do not tile their bounding box.
MultiblockMesh build_multiblock(const std::vector<BlockSpec>& blocks, std::string layout = "custom");

/// 2x2 split of the unit square at (0.5, 0.5). Lower-left and upper-right
/// blocks get n x n cells, the other two n/ratio x n/ratio.
MultiblockMesh build_checkerboard(int n, int ratio = 4);

struct SubEdge {
  int interface = -1;
  Axis normal = Axis::X;
  double coord = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  double length = 0.0;
  Point midpoint;
  int minus_cell = -1;  ///< global cell on the minus side
  int plus_cell = -1;
};

struct Interface {
  int minus_block = -1;
  int plus_block = -1;
  Axis normal = Axis::X;
  double coord = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<int> sub_edges;  ///< sorted by tangential coordinate

  double length() const { return t1 - t0; }
};

struct InterfaceMesh {
  std::vector<Interface> interfaces;
  std::vector<SubEdge> sub_edges;
};

/// Intersects the edge traces of every adjacent block pair.
InterfaceMesh compute_interface_trace(const MultiblockMesh& mesh);

enum class DofKind { Interior, Interface, Boundary };

/// One normal-flux unknown. Its orientation is always +normal axis, so the
/// minus cell sees it as outflow and the plus cell as inflow.
struct VelocityDof {
  DofKind kind = DofKind::Interior;
  Axis normal = Axis::X;
  Point midpoint;
  double length = 0.0;
  int minus_cell = -1;
  int plus_cell = -1;
  int sub_edge = -1;
};

class DofMap {
 public:
  DofMap(std::vector<VelocityDof> velocity, std::vector<std::array<std::vector<int>, 4>> cell_sides,
         std::vector<int> sub_edge_dof, int num_pressure);

  int num_velocity() const { return static_cast<int>(velocity_.size()); }
  int num_pressure() const { return num_pressure_; }
  const VelocityDof& velocity(int d) const { return velocity_[d]; }
  const std::vector<VelocityDof>& velocity_dofs() const { return velocity_; }
  /// Velocity unknowns covering one side of a cell, ordered along the side.
  const std::vector<int>& side_dofs(int cell, Side s) const { return cell_sides_[cell][static_cast<int>(s)]; }
  int sub_edge_dof(int sub_edge) const { return sub_edge_dof_[sub_edge]; }

 private:
  std::vector<VelocityDof> velocity_;
  std::vector<std::array<std::vector<int>, 4>> cell_sides_;
  std::vector<int> sub_edge_dof_;
  int num_pressure_;
};

DofMap enumerate_dofs(const MultiblockMesh& mesh, const InterfaceMesh& trace);

/// Mesh, interface trace and unknown numbering bundled together.
struct Discretization {
  MultiblockMesh mesh;
  InterfaceMesh trace;
  DofMap dofs;
};

Discretization discretize(MultiblockMesh mesh);

}  // namespace evflow
