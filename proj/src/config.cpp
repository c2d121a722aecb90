#include "evflow/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace evflow {

namespace {

using json = nlohmann::json;

const std::set<std::string> kKeys{"schema", "test",  "value",    "permeability", "layout",      "levels",
                                  "n",      "ratio", "convention", "stencil",    "tol",         "weighted",
                                  "block_jacobi", "dd_tol", "dd_max_iter", "csv", "vtk"};
const std::set<std::string> kBlockKeys{"x0", "x1", "y0", "y1", "nx", "ny"};

class Reader {
 public:
  Reader(const json& doc, std::vector<ConfigError>& errors) : doc_(doc), errors_(errors) {}

  void fail(const std::string& key, const std::string& reason) { errors_.push_back({key, reason}); }

  bool has(const std::string& key) const { return doc_.contains(key); }

  std::optional<int> integer(const std::string& key, const json& v) {
    if (!v.is_number_integer()) {
      fail(key, "expected an integer, got " + v.dump());
      return std::nullopt;
    }
    return v.get<int>();
  }

  std::optional<double> number(const std::string& key, const json& v) {
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(key, "expected a finite number, got " + v.dump());
      return std::nullopt;
    }
    return v.get<double>();
  }

  void read_positive(const std::string& key, double& out) {
    if (!has(key)) return;
    if (auto v = number(key, doc_[key])) {
      if (*v > 0.0) out = *v;
      else fail(key, "must be positive");
    }
  }

  void read_bool(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (doc_[key].is_boolean()) out = doc_[key].get<bool>();
    else fail(key, "expected true or false, got " + doc_[key].dump());
  }

  void read_string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (doc_[key].is_string()) out = doc_[key].get<std::string>();
    else fail(key, "expected a string, got " + doc_[key].dump());
  }

  const json& operator[](const std::string& key) const { return doc_[key]; }

 private:
  const json& doc_;
  std::vector<ConfigError>& errors_;
};

void read_test(Reader& r, RunConfig& cfg) {
  if (!r.has("test")) {
    r.fail("test", "missing required key");
    return;
  }
  const json& v = r["test"];
  if (v.is_number_integer()) {
    const int id = v.get<int>();
    if (id == 1 || id == 2) cfg.test = "test" + std::to_string(id);
    else r.fail("test", "unknown test id " + std::to_string(id) + " (expected 1 or 2)");
  } else if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "test1" || name == "test2" || name == "constant" || name == "linear-x") cfg.test = name;
    else r.fail("test", "unknown case \"" + name + "\"");
  } else {
    r.fail("test", "expected 1, 2 or a case name, got " + v.dump());
  }
}

void read_layout(Reader& r, RunConfig& cfg) {
  if (!r.has("layout")) return;
  const json& v = r["layout"];
  if (v.is_string()) {
    if (v.get<std::string>() != "checkerboard2x2") r.fail("layout", "unknown builtin layout " + v.dump());
    return;
  }
  if (!v.is_array() || v.empty()) {
    r.fail("layout", "expected \"checkerboard2x2\" or a non-empty list of blocks");
    return;
  }
  std::vector<BlockSpec> blocks;
  bool good = true;
  for (std::size_t b = 0; b < v.size(); ++b) {
    const std::string prefix = "layout[" + std::to_string(b) + "]";
    const json& blk = v[b];
    if (!blk.is_object()) {
      r.fail(prefix, "expected an object");
      good = false;
      continue;
    }
    for (auto it = blk.begin(); it != blk.end(); ++it) {
      if (!kBlockKeys.count(it.key())) {
        r.fail(prefix + "." + it.key(), "unknown key");
        good = false;
      }
    }
    BlockSpec spec;
    double* coords[] = {&spec.extent.x0, &spec.extent.x1, &spec.extent.y0, &spec.extent.y1};
    const char* names[] = {"x0", "x1", "y0", "y1"};
    for (int k = 0; k < 4; ++k) {
      const std::string key = prefix + "." + names[k];
      if (!blk.contains(names[k])) {
        r.fail(key, "missing required key");
        good = false;
      } else if (auto x = r.number(key, blk[names[k]])) {
        *coords[k] = *x;
      } else {
        good = false;
      }
    }
    for (auto [name, out] : {std::pair{"nx", &spec.nx}, std::pair{"ny", &spec.ny}}) {
      const std::string key = prefix + "." + name;
      if (!blk.contains(name)) {
        r.fail(key, "missing required key");
        good = false;
      } else if (auto n = r.integer(key, blk[name])) {
        if (*n < 1) {
          r.fail(key, "must be at least 1");
          good = false;
        }
        *out = *n;
      } else {
        good = false;
      }
    }
    blocks.push_back(spec);
  }
  if (!good) return;
  try {
    build_multiblock(blocks, "custom");
    cfg.blocks = std::move(blocks);
    cfg.layout = "custom";
  } catch (const std::exception& e) {
    r.fail("layout", e.what());
  }
}

void read_levels(Reader& r, RunConfig& cfg) {
  if (r.has("levels") && r.has("n")) {
    r.fail("n", "give either \"n\" or \"levels\", not both");
    return;
  }
  if (r.has("n")) {
    if (auto n = r.integer("n", r["n"])) cfg.levels = {*n};
    return;
  }
  if (!r.has("levels")) return;
  const json& v = r["levels"];
  if (!v.is_array() || v.empty()) {
    r.fail("levels", "expected a non-empty list of integers");
    return;
  }
  std::vector<int> levels;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (auto n = r.integer("levels[" + std::to_string(k) + "]", v[k])) levels.push_back(*n);
    else return;
  }
  cfg.levels = std::move(levels);
}

}  // namespace

ManufacturedCase RunConfig::make_case() const {
  if (test == "test1") return manufactured_case(1);
  if (test == "test2") return manufactured_case(2);
  if (test == "constant") return constant_case(value, permeability);
  return linear_x_case(permeability);
}

MultiblockMesh RunConfig::make_mesh(int n) const {
  if (explicit_layout()) return build_multiblock(blocks, "custom");
  return checkerboard_level(n, study.convention, study.ratio);
}

std::string ParseResult::message() const {
  std::ostringstream out;
  for (const auto& e : errors) out << e.key << ": " << e.reason << "\n";
  return out.str();
}

ParseResult parse_config(const std::string& text) {
  ParseResult result;
  auto& errors = result.errors;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    errors.push_back({"<document>", std::string("malformed JSON: ") + e.what()});
    return result;
  }
  if (!doc.is_object()) {
    errors.push_back({"<document>", "expected a JSON object"});
    return result;
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!kKeys.count(it.key())) errors.push_back({it.key(), "unknown key"});
  }

  Reader r(doc, errors);
  if (!r.has("schema")) {
    r.fail("schema", "missing required key");
  } else if (!doc["schema"].is_number_integer() || doc["schema"].get<int>() != 1) {
    r.fail("schema", "unsupported schema " + doc["schema"].dump() + " (expected 1)");
  }

  RunConfig cfg;
  read_test(r, cfg);
  if (r.has("value")) {
    if (auto v = r.number("value", doc["value"])) cfg.value = *v;
  }
  if (r.has("value") && cfg.test != "constant") r.fail("value", "only used by the \"constant\" case");
  r.read_positive("permeability", cfg.permeability);
  if (r.has("permeability") && (cfg.test == "test1" || cfg.test == "test2")) {
    r.fail("permeability", "test 1 and test 2 fix their own permeability");
  }
  read_layout(r, cfg);
  read_levels(r, cfg);

  if (r.has("ratio")) {
    if (auto v = r.integer("ratio", doc["ratio"])) {
      if (*v >= 1) cfg.study.ratio = *v;
      else r.fail("ratio", "must be at least 1");
    }
  }
  if (r.has("convention")) {
    std::string name;
    r.read_string("convention", name);
    if (name == "coarse-per-unit") cfg.study.convention = LevelConvention::CoarsePerUnit;
    else if (name == "fine-block") cfg.study.convention = LevelConvention::FineBlockCells;
    else if (doc["convention"].is_string()) r.fail("convention", "expected \"coarse-per-unit\" or \"fine-block\"");
  }
  if (r.has("stencil")) {
    std::string name;
    r.read_string("stencil", name);
    if (name == "sub-edge") cfg.study.stencil = TwoPointStencil::SubEdgeSymmetric;
    else if (name == "half-cell") cfg.study.stencil = TwoPointStencil::HalfCell;
    else if (doc["stencil"].is_string()) r.fail("stencil", "expected \"sub-edge\" or \"half-cell\"");
  }
  r.read_positive("tol", cfg.study.tol);
  r.read_bool("weighted", cfg.study.weighted);
  r.read_bool("block_jacobi", cfg.block_jacobi);
  r.read_positive("dd_tol", cfg.dd_tol);
  if (r.has("dd_max_iter")) {
    if (auto v = r.integer("dd_max_iter", doc["dd_max_iter"])) {
      if (*v >= 1) cfg.dd_max_iter = *v;
      else r.fail("dd_max_iter", "must be at least 1");
    }
  }
  r.read_string("csv", cfg.csv);
  r.read_string("vtk", cfg.vtk);

  // Levels are checked against the mesh builder once ratio and convention are known.
  if (!cfg.explicit_layout()) {
    for (std::size_t k = 0; k < cfg.levels.size(); ++k) {
      const std::string key = r.has("n") ? "n" : "levels[" + std::to_string(k) + "]";
      try {
        validate_level(cfg.levels[k], cfg.study.convention, cfg.study.ratio);
      } catch (const std::invalid_argument& e) {
        r.fail(key, e.what());
      }
      if (k > 0 && cfg.levels[k] <= cfg.levels[k - 1]) r.fail(key, "levels must be strictly increasing");
    }
  }

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace evflow
