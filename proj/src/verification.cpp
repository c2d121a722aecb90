#include "evflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <stdexcept>
#include <string>

namespace evflow {

namespace {

constexpr double kPi = std::numbers::pi;

double sin_product(Point x) { return std::sin(2 * kPi * x.x) * std::sin(2 * kPi * x.y); }

Vec2 sin_product_gradient(Point x) {
  return {2 * kPi * std::cos(2 * kPi * x.x) * std::sin(2 * kPi * x.y),
          2 * kPi * std::sin(2 * kPi * x.x) * std::cos(2 * kPi * x.y)};
}

double distance_to_segment(Point p, const Interface& iface) {
  const double normal_gap = std::abs(component(p, iface.normal) - iface.coord);
  const double t = component(p, iface.normal == Axis::X ? Axis::Y : Axis::X);
  const double tangential_gap = std::max({iface.t0 - t, t - iface.t1, 0.0});
  return std::hypot(normal_gap, tangential_gap);
}

}  // namespace

ManufacturedCase manufactured_case(int id) {
  if (id == 1) {
    return {"test1", sin_product,
            [](Point x) {
              const Vec2 g = sin_product_gradient(x);
              return Vec2{-g.x, -g.y};
            },
            [](Point x) { return 8 * kPi * kPi * sin_product(x); }, PermField::constant(1.0)};
  }
  if (id == 2) {
    auto k = [](Point x) { return 15.0 - 10.0 * std::sin(3 * kPi * x.x) * std::sin(3 * kPi * x.y); };
    PermField perm([k](Point x) { return DiagTensor{k(x), k(x)}; }, 5.0, 25.0);
    return {"test2", sin_product,
            [k](Point x) {
              const Vec2 g = sin_product_gradient(x);
              return Vec2{-k(x) * g.x, -k(x) * g.y};
            },
            [k](Point x) {
              // f = -(K_x p_x + K_y p_y) - K (p_xx + p_yy)
              const double kx = -30 * kPi * std::cos(3 * kPi * x.x) * std::sin(3 * kPi * x.y);
              const double ky = -30 * kPi * std::sin(3 * kPi * x.x) * std::cos(3 * kPi * x.y);
              const Vec2 g = sin_product_gradient(x);
              const double laplacian = -8 * kPi * kPi * sin_product(x);
              return -(kx * g.x + ky * g.y) - k(x) * laplacian;
            },
            perm};
  }
  throw std::invalid_argument("unknown test id " + std::to_string(id));
}

ManufacturedCase constant_case(double value, double k) {
  return {"constant", [value](Point) { return value; }, [](Point) { return Vec2{}; }, [](Point) { return 0.0; },
          PermField::constant(k)};
}

ManufacturedCase linear_x_case(double k) {
  return {"linear-x", [](Point x) { return x.x; }, [k](Point) { return Vec2{-k, 0.0}; }, [](Point) { return 0.0; },
          PermField::constant(k)};
}

double interface_velocity_error(std::span<const double> flux, const InterfaceMesh& trace, const ManufacturedCase& mfg,
                                bool weighted) {
  if (flux.size() != trace.sub_edges.size()) throw std::invalid_argument("flux/sub-edge count mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t e = 0; e < flux.size(); ++e) {
    const auto& se = trace.sub_edges[e];
    const double w = weighted ? se.length : 1.0;
    const double exact = component(mfg.velocity(se.midpoint), se.normal);
    num += w * (flux[e] - exact) * (flux[e] - exact);
    den += w * exact * exact;
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double interior_velocity_error(const MixedSolution& sol, const Discretization& disc, const ManufacturedCase& mfg,
                               double min_distance) {
  double num = 0.0;
  double den = 0.0;
  for (int c = 0; c < disc.mesh.num_cells(); ++c) {
    const Point x = disc.mesh.cell_center(c);
    const bool far = std::all_of(disc.trace.interfaces.begin(), disc.trace.interfaces.end(),
                                 [&](const Interface& i) { return distance_to_segment(x, i) > min_distance; });
    if (!far) continue;
    // RT0 at the cell center: mean of the two opposite side fluxes.
    auto side_flux = [&](Side s) {
      double q = 0.0, l = 0.0;
      for (int d : disc.dofs.side_dofs(c, s)) {
        q += sol.u[d] * disc.dofs.velocity(d).length;
        l += disc.dofs.velocity(d).length;
      }
      return q / l;
    };
    const Vec2 uh{0.5 * (side_flux(Side::Left) + side_flux(Side::Right)),
                  0.5 * (side_flux(Side::Bottom) + side_flux(Side::Top))};
    const Vec2 u = mfg.velocity(x);
    const double area = disc.mesh.cell_area(c);
    num += area * ((uh.x - u.x) * (uh.x - u.x) + (uh.y - u.y) * (uh.y - u.y));
    den += area * (u.x * u.x + u.y * u.y);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

double convergence_order(double e1, double e2, double n1, double n2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || !(n1 > 0.0) || !(n2 > n1)) {
    throw std::invalid_argument("convergence order needs positive errors and n2 > n1 > 0");
  }
  return std::log(e1 / e2) / std::log(n2 / n1);
}

void validate_level(int n, LevelConvention convention, int ratio) {
  if (ratio < 1) throw std::invalid_argument("ratio must be positive");
  if (n < 1) throw std::invalid_argument("level " + std::to_string(n) + " must be positive");
  if (convention == LevelConvention::FineBlockCells && n % ratio != 0) {
    throw std::invalid_argument(std::to_string(n) + " not divisible by " + std::to_string(ratio));
  }
  if (convention == LevelConvention::CoarsePerUnit && n % 2 != 0) {
    throw std::invalid_argument(std::to_string(n) + " is odd; coarse blocks need n/2 cells");
  }
}

MultiblockMesh checkerboard_level(int n, LevelConvention convention, int ratio) {
  validate_level(n, convention, ratio);
  return build_checkerboard(convention == LevelConvention::CoarsePerUnit ? n * ratio / 2 : n, ratio);
}

LevelReport run_level(const ManufacturedCase& mfg, int n, const StudyOptions& opts) {
  const Discretization disc = discretize(checkerboard_level(n, opts.convention, opts.ratio));
  const MixedSolution sol = solve_case(mfg, disc, opts.tol);
  const PostFields post = run_postprocess(disc, sol, mfg, opts.stencil);

  std::vector<double> raw(disc.trace.sub_edges.size());
  for (std::size_t e = 0; e < raw.size(); ++e) raw[e] = sol.u[disc.dofs.sub_edge_dof(static_cast<int>(e))];

  LevelReport r;
  r.n = n;
  r.cells = disc.mesh.num_cells();
  r.e_u = interface_velocity_error(raw, disc.trace, mfg, opts.weighted);
  r.e_rec = interface_velocity_error(
      std::span<const double>(post.recovered.values.data(), static_cast<std::size_t>(post.recovered.values.size())),
      disc.trace, mfg, opts.weighted);
  r.interior_error = interior_velocity_error(sol, disc, mfg, opts.interior_distance);
  r.mass_residual = residual_mass_conservation(sol, mfg, disc.mesh, disc.dofs);
  r.constraint_residual = max_constraint_residual(post.poly, sol.p, post.lambda);
  return r;
}

ConvergenceStudy convergence_study(const ManufacturedCase& mfg, const std::vector<int>& levels,
                                   const StudyOptions& opts) {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    validate_level(levels[k], opts.convention, opts.ratio);
    if (k > 0 && levels[k] <= levels[k - 1]) throw std::invalid_argument("levels must be strictly increasing");
  }

  ConvergenceStudy study;
  study.levels.resize(levels.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, opts.threads));
  for (std::size_t start = 0; start < levels.size(); start += width) {
    std::vector<std::future<LevelReport>> batch;
    for (std::size_t k = start; k < std::min(levels.size(), start + width); ++k) {
      batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred,
                                 [&mfg, &opts, n = levels[k]] { return run_level(mfg, n, opts); }));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) study.levels[start + k] = batch[k].get();
  }

  for (std::size_t k = 0; k < study.levels.size(); ++k) {
    const auto& cur = study.levels[k];
    ConvergenceRow row{cur.n, cur.e_u, std::nullopt, cur.e_rec, std::nullopt};
    if (k > 0) {
      const auto& prev = study.levels[k - 1];
      row.order_u = convergence_order(prev.e_u, cur.e_u, prev.n, cur.n);
      row.order_rec = convergence_order(prev.e_rec, cur.e_rec, prev.n, cur.n);
    }
    study.rows.push_back(row);
  }
  return study;
}

ConvergenceStudy convergence_study(int test_id, const std::vector<int>& levels, const StudyOptions& opts) {
  return convergence_study(manufactured_case(test_id), levels, opts);
}

}  // namespace evflow
