// evflow: enhanced-velocity Darcy solver on non-matching multiblock grids.
//
//   evflow solve|convergence|compare-dd [--config PATH] [inline flags]
//
// Inline flags override keys of the config file. EVFLOW_THREADS caps the
// number of concurrent workers.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "evflow/commands.hpp"

namespace {

int thread_cap() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("EVFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw std::runtime_error(std::string("EVFLOW_THREADS must be a positive integer, got \"") + env + "\"");
    }
    threads = static_cast<int>(std::min<long>(v, threads));
  }
  return threads;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Enhanced-velocity mixed FEM for Darcy flow on non-matching multiblock grids"};
  app.require_subcommand(1);

  std::string config_path, test, levels, convention, stencil, csv, vtk;
  int n = 0, ratio = 0, dd_max_iter = 0;
  double tol = 0.0, dd_tol = 0.0;
  bool unweighted = false, block_jacobi = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration (\"schema\": 1)");
    cmd->add_option("--test", test, "1, 2, constant or linear-x");
    cmd->add_option("--ratio", ratio, "coarse to fine mesh-size ratio");
    cmd->add_option("--tol", tol, "linear solver tolerance");
    cmd->add_option("--convention", convention, "coarse-per-unit or fine-block");
    cmd->add_option("--stencil", stencil, "sub-edge or half-cell");
    cmd->add_flag("--unweighted", unweighted, "unweighted interface error norm");
  };
  auto* solve = app.add_subcommand("solve", "solve one level, report errors, optionally write VTK");
  auto* conv = app.add_subcommand("convergence", "interface error table over several levels");
  auto* dd = app.add_subcommand("compare-dd", "block-Jacobi against the monolithic solve");
  for (auto* cmd : {solve, conv, dd}) add_common(cmd);
  for (auto* cmd : {solve, dd}) cmd->add_option("--n", n, "refinement level");
  conv->add_option("--levels", levels, "comma-separated levels, e.g. 8,16,32,48");
  conv->add_option("--csv", csv, "output CSV path (default: stdout)");
  solve->add_option("--vtk", vtk, "output directory for per-block VTK files");
  solve->add_flag("--block-jacobi", block_jacobi, "solve with block-Jacobi sweeps");
  for (auto* cmd : {solve, dd}) {
    cmd->add_option("--dd-tol", dd_tol, "block-Jacobi stopping tolerance");
    cmd->add_option("--dd-max-iter", dd_max_iter, "block-Jacobi sweep limit");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* flag) { return sub->get_option_no_throw(flag) && sub->count(flag) > 0; };

  std::string text = "{\"schema\": 1}";
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot read config " << config_path << "\n";
      return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }

  // Inline flags are merged into the document so the same validation applies.
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (!doc.is_discarded() && doc.is_object()) {
    if (!given("--config") && !given("--test")) doc["test"] = 1;
    if (given("--test")) {
      if (test == "1" || test == "2") doc["test"] = std::stoi(test);
      else doc["test"] = test;
    }
    // An inline level replaces whichever level key the file used.
    if (given("--n")) {
      doc.erase("levels");
      doc["n"] = n;
    }
    if (given("--levels")) {
      nlohmann::json list = nlohmann::json::array();
      std::istringstream in(levels);
      std::string item;
      while (std::getline(in, item, ',')) {
        try {
          std::size_t used = 0;
          const int v = std::stoi(item, &used);
          if (used != item.size()) throw std::invalid_argument(item);
          list.push_back(v);
        } catch (const std::exception&) {
          list.push_back(item);  // rejected with a precise message below
        }
      }
      doc.erase("n");
      doc["levels"] = list;
    }
    if (given("--ratio")) doc["ratio"] = ratio;
    if (given("--tol")) doc["tol"] = tol;
    if (given("--convention")) doc["convention"] = convention;
    if (given("--stencil")) doc["stencil"] = stencil;
    if (given("--unweighted")) doc["weighted"] = false;
    if (given("--block-jacobi")) doc["block_jacobi"] = true;
    if (given("--dd-tol")) doc["dd_tol"] = dd_tol;
    if (given("--dd-max-iter")) doc["dd_max_iter"] = dd_max_iter;
    if (given("--csv")) doc["csv"] = csv;
    if (given("--vtk")) doc["vtk"] = vtk;
    text = doc.dump();
  }

  const evflow::ParseResult parsed = evflow::parse_config(text);
  if (!parsed.ok()) {
    std::cerr << "invalid configuration:\n" << parsed.message();
    return 2;
  }

  evflow::CommandContext ctx;
  ctx.out = &std::cout;
  ctx.err = &std::cerr;
  try {
    ctx.threads = thread_cap();
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return evflow::run_command(command, *parsed.config, ctx);
}
