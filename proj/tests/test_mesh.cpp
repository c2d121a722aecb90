#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "evflow/mesh.hpp"
#include "oracles.hpp"

using namespace evflow;

namespace {

MultiblockMesh two_strips(int ny_left, int ny_right) {
  return build_multiblock({{{0.0, 1.0, 0.0, 1.0}, 1, ny_left}, {{1.0, 2.0, 0.0, 1.0}, 1, ny_right}});
}

}  // namespace

TEST_CASE("subdomain grid spacing and indexing") {
  SubdomainGrid g(0, {0.0, 2.0, 1.0, 2.0}, 4, 2);
  CHECK(g.hx() == doctest::Approx(0.5));
  CHECK(g.hy() == doctest::Approx(0.5));
  CHECK(g.num_cells() == 8);
  CHECK(g.cell_index(3, 1) == 7);
  CHECK(g.cell_ij(7) == std::array<int, 2>{3, 1});
  CHECK(g.cell_center(0, 0).x == doctest::Approx(0.25));
  CHECK(g.cell_center(0, 0).y == doctest::Approx(1.25));
  CHECK(g.locate_column(2.0) == 3);
  CHECK(g.locate_row(0.0) == 0);

  CHECK_THROWS_AS(SubdomainGrid(0, {1.0, 1.0, 0.0, 1.0}, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(SubdomainGrid(0, {0.0, 1.0, 0.0, 1.0}, 0, 1), std::invalid_argument);
}

TEST_CASE("single block has no interface and four boundary edges") {
  const Discretization d = discretize(build_multiblock({{{0.0, 1.0, 0.0, 1.0}, 1, 1}}));
  CHECK(d.mesh.num_cells() == 1);
  CHECK(d.trace.interfaces.empty());
  CHECK(d.dofs.num_velocity() == 4);
  CHECK(d.dofs.num_pressure() == 1);
  for (const auto& v : d.dofs.velocity_dofs()) CHECK(v.kind == DofKind::Boundary);
}

TEST_CASE("non-tiling layouts are rejected") {
  // gap
  CHECK_THROWS_AS(build_multiblock({{{0.0, 0.5, 0.0, 1.0}, 1, 1}, {{0.6, 1.0, 0.0, 1.0}, 1, 1}}),
                  std::invalid_argument);
  // overlap
  CHECK_THROWS_AS(build_multiblock({{{0.0, 0.6, 0.0, 1.0}, 1, 1}, {{0.5, 1.0, 0.0, 1.0}, 1, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_checkerboard(6, 4), "6 not divisible by 4", std::invalid_argument);
}

TEST_CASE("1x2 against 1x3 strips: trace from interval intersection") {
  const MultiblockMesh mesh = two_strips(2, 3);
  const InterfaceMesh trace = compute_interface_trace(mesh);
  REQUIRE(trace.interfaces.size() == 1);
  const auto expected = oracle::merged_breakpoints(oracle::uniform_lines(0, 1, 2), oracle::uniform_lines(0, 1, 3));
  REQUIRE(expected.size() == 5);
  const auto& iface = trace.interfaces[0];
  REQUIRE(iface.sub_edges.size() == expected.size() - 1);
  const double lengths[] = {1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3};
  for (std::size_t k = 0; k < iface.sub_edges.size(); ++k) {
    const auto& se = trace.sub_edges[iface.sub_edges[k]];
    CHECK(se.t0 == doctest::Approx(expected[k]).epsilon(1e-14));
    CHECK(se.t1 == doctest::Approx(expected[k + 1]).epsilon(1e-14));
    CHECK(se.length == doctest::Approx(lengths[k]).epsilon(1e-14));
    // Each piece sits inside exactly the cells whose edges contain it.
    const int left_row = static_cast<int>(std::floor(se.midpoint.y * 2));
    const int right_row = static_cast<int>(std::floor(se.midpoint.y * 3));
    CHECK(se.minus_cell == left_row);
    CHECK(se.plus_cell == 2 + right_row);
  }

  const DofMap dofs = enumerate_dofs(mesh, trace);
  CHECK(dofs.num_pressure() == 5);
  int interface_dofs = 0;
  for (const auto& v : dofs.velocity_dofs()) interface_dofs += v.kind == DofKind::Interface;
  CHECK(interface_dofs == 4);
}

TEST_CASE("matching 2x2 blocks reproduce original edges") {
  const MultiblockMesh mesh = build_multiblock({{{0.0, 0.5, 0.0, 0.5}, 2, 2},
                                                {{0.5, 1.0, 0.0, 0.5}, 2, 2},
                                                {{0.0, 0.5, 0.5, 1.0}, 2, 2},
                                                {{0.5, 1.0, 0.5, 1.0}, 2, 2}});
  const Discretization d = discretize(mesh);
  REQUIRE(d.trace.interfaces.size() == 4);
  for (const auto& iface : d.trace.interfaces) {
    CHECK(iface.sub_edges.size() == 2);
    for (int e : iface.sub_edges) CHECK(d.trace.sub_edges[e].length == doctest::Approx(0.25));
  }
  // Same count as conforming RT0 on a 4x4 grid: 5*4 x-edges + 4*5 y-edges.
  CHECK(d.dofs.num_velocity() == 40);
  CHECK(d.dofs.num_pressure() == 16);
}

TEST_CASE("checkerboard splits every coarse interface edge into ratio pieces") {
  for (int n : {8, 16, 32}) {
    const MultiblockMesh mesh = build_checkerboard(n, 4);
    CHECK(mesh.num_blocks() == 4);
    const InterfaceMesh trace = compute_interface_trace(mesh);
    CHECK(trace.interfaces.size() == 4);
    for (const auto& iface : trace.interfaces) {
      CHECK(iface.sub_edges.size() == static_cast<std::size_t>(n));
      std::map<int, int> per_coarse_cell;
      const int coarse = mesh.block(iface.minus_block).nx() < mesh.block(iface.plus_block).nx() ? iface.minus_block
                                                                                                : iface.plus_block;
      for (int e : iface.sub_edges) {
        const auto& se = trace.sub_edges[e];
        ++per_coarse_cell[coarse == iface.minus_block ? se.minus_cell : se.plus_cell];
      }
      for (auto [cell, count] : per_coarse_cell) CHECK(count == 4);
    }
  }
}

TEST_CASE("random two-block layouts: trace partitions the interface") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> res(1, 17);
  std::uniform_real_distribution<double> cut(0.2, 0.8);
  for (int trial = 0; trial < 50; ++trial) {
    const double xs = cut(rng);
    const int nl = res(rng), nr = res(rng);
    const MultiblockMesh mesh =
        build_multiblock({{{0.0, xs, 0.0, 1.0}, res(rng), nl}, {{xs, 1.0, 0.0, 1.0}, res(rng), nr}});
    const Discretization d = discretize(mesh);
    REQUIRE(d.trace.interfaces.size() == 1);
    const auto& iface = d.trace.interfaces[0];
    const auto expected =
        oracle::merged_breakpoints(oracle::uniform_lines(0, 1, nl), oracle::uniform_lines(0, 1, nr), 1e-12);
    CHECK(iface.sub_edges.size() == expected.size() - 1);
    double total = 0.0;
    double prev = 0.0;
    for (int e : iface.sub_edges) {
      const auto& se = d.trace.sub_edges[e];
      CHECK(se.length > 0.0);
      CHECK(se.t0 == doctest::Approx(prev).epsilon(1e-13));
      prev = se.t1;
      total += se.length;
      // The linked cells really contain the sub-edge midpoint on their edge.
      const Point cl = mesh.cell_center(se.minus_cell), cr = mesh.cell_center(se.plus_cell);
      CHECK(std::abs(cl.y - se.midpoint.y) <= 0.5 / nl + 1e-12);
      CHECK(std::abs(cr.y - se.midpoint.y) <= 0.5 / nr + 1e-12);
    }
    CHECK(std::abs(total - iface.length()) <= 1e-12 * iface.length());
    // One pressure per cell; velocity unknowns = conforming edges + sub-edges.
    int bx = 0;
    for (const auto& g : mesh.blocks()) bx += (g.nx() - 1) * g.ny() + g.nx() * (g.ny() - 1) + 2 * g.nx() + g.ny();
    CHECK(d.dofs.num_velocity() == bx + static_cast<int>(iface.sub_edges.size()));
    CHECK(d.dofs.num_pressure() == mesh.num_cells());
  }
}

TEST_CASE("every cell side is covered exactly by its unknowns") {
  const Discretization d = discretize(build_checkerboard(8, 4));
  for (int c = 0; c < d.mesh.num_cells(); ++c) {
    const auto& g = d.mesh.block(d.mesh.block_of(c));
    for (Side s : kSides) {
      double len = 0.0;
      for (int dof : d.dofs.side_dofs(c, s)) {
        const auto& v = d.dofs.velocity(dof);
        CHECK(v.normal == side_axis(s));
        CHECK((side_sign(s) > 0 ? v.minus_cell : v.plus_cell) == c);
        len += v.length;
      }
      CHECK(len == doctest::Approx(side_axis(s) == Axis::X ? g.hy() : g.hx()).epsilon(1e-13));
    }
  }
}
