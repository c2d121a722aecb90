#include "evflow/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace evflow {

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << kConvergenceHeader << "\n";
  for (const auto& r : rows) {
    out << r.n << "," << format_sci(r.e_u) << "," << (r.order_u ? format_sci(*r.order_u) : "") << ","
        << format_sci(r.e_rec) << "," << (r.order_rec ? format_sci(*r.order_rec) : "") << "\n";
  }
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream out;
  write_convergence_csv(out, rows);
  return out.str();
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw std::runtime_error("line " + std::to_string(line) + ": malformed number \"" + s + "\"");
  }
  return v;
}

}  // namespace

std::vector<ConvergenceRow> read_convergence_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kConvergenceHeader) {
    throw std::runtime_error("missing convergence header \"" + std::string(kConvergenceHeader) + "\"");
  }
  std::vector<ConvergenceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 5 fields");
    ConvergenceRow r;
    r.n = static_cast<int>(parse_double(f[0], lineno));
    r.e_u = parse_double(f[1], lineno);
    if (!f[2].empty()) r.order_u = parse_double(f[2], lineno);
    r.e_rec = parse_double(f[3], lineno);
    if (!f[4].empty()) r.order_rec = parse_double(f[4], lineno);
    rows.push_back(r);
  }
  return rows;
}

namespace {

void write_cell_scalars(std::ostream& out, const char* name, const std::vector<double>& v) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double x : v) out << format_sci(x) << "\n";
}

double mean_side_flux(const MixedSolution& sol, const DofMap& dofs, int cell, Side s) {
  double q = 0.0, l = 0.0;
  for (int d : dofs.side_dofs(cell, s)) {
    q += sol.u[d] * dofs.velocity(d).length;
    l += dofs.velocity(d).length;
  }
  return l > 0.0 ? q / l : 0.0;
}

}  // namespace

std::vector<std::string> write_vtk_fields(const std::string& dir, const Discretization& disc,
                                          const MixedSolution& sol, const PostFields& post) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> paths;
  const auto& mesh = disc.mesh;
  for (int b = 0; b < mesh.num_blocks(); ++b) {
    const auto& g = mesh.block(b);
    const std::string path = (std::filesystem::path(dir) / ("block" + std::to_string(b) + ".vtk")).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");

    out << "# vtk DataFile Version 3.0\n";
    out << "evflow " << mesh.layout() << " block " << b << "\n";
    out << "ASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << g.nx() + 1 << " " << g.ny() + 1 << " 1\n";
    out << "ORIGIN " << format_sci(g.extent().x0) << " " << format_sci(g.extent().y0) << " 0\n";
    out << "SPACING " << format_sci(g.hx()) << " " << format_sci(g.hy()) << " 1\n";

    const int ncell = g.num_cells();
    std::vector<double> pressure(ncell), center(ncell);
    std::array<std::vector<double>, 4> flux;
    for (auto& f : flux) f.resize(ncell);
    const auto& field = post.smooth[b];
    for (int j = 0; j < g.ny(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        const int local = g.cell_index(i, j);
        const int c = mesh.cell_offset(b) + local;
        pressure[local] = sol.p[c];
        center[local] = field.node(2 * i + 1, 2 * j + 1);
        for (Side s : kSides) flux[static_cast<int>(s)][local] = mean_side_flux(sol, disc.dofs, c, s);
      }
    }
    out << "CELL_DATA " << ncell << "\n";
    write_cell_scalars(out, "pressure", pressure);
    write_cell_scalars(out, "s_h_center", center);
    write_cell_scalars(out, "flux_left", flux[0]);
    write_cell_scalars(out, "flux_right", flux[1]);
    write_cell_scalars(out, "flux_bottom", flux[2]);
    write_cell_scalars(out, "flux_top", flux[3]);

    out << "POINT_DATA " << (g.nx() + 1) * (g.ny() + 1) << "\n";
    out << "SCALARS s_h double 1\nLOOKUP_TABLE default\n";
    for (int j = 0; j <= g.ny(); ++j) {
      for (int i = 0; i <= g.nx(); ++i) out << format_sci(field.node(2 * i, 2 * j)) << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace evflow
