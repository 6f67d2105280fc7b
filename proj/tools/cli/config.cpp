#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "latgauge/error.hpp"

namespace latgauge::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

// Read-only view of one config object that rejects unknown keys up front and
// checks value types on access.
class Section {
 public:
  Section(const json& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(ErrorKind::kParse, where() + " must be an object");
    for (const auto& [key, value] : node_.items()) {
      if (!allowed.count(key)) fail(ErrorKind::kParse, "unknown key '" + name(key) + "'");
    }
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }
  [[nodiscard]] const json& raw(const std::string& key) const { return node_.at(key); }
  [[nodiscard]] std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[nodiscard]] Section sub(const std::string& key, std::set<std::string> allowed) const {
    return Section(node_.at(key), name(key), std::move(allowed));
  }

  [[nodiscard]] double number(const std::string& key) const { return as_number(node_.at(key), name(key)); }
  [[nodiscard]] long long integer(const std::string& key) const { return as_integer(node_.at(key), name(key)); }
  [[nodiscard]] bool boolean(const std::string& key) const {
    const auto& v = node_.at(key);
    if (!v.is_boolean()) fail(ErrorKind::kParse, name(key) + " must be true or false");
    return v.get<bool>();
  }
  [[nodiscard]] std::string string(const std::string& key) const {
    const auto& v = node_.at(key);
    if (!v.is_string()) fail(ErrorKind::kParse, name(key) + " must be a string");
    return v.get<std::string>();
  }

  static double as_number(const json& v, const std::string& field) {
    if (!v.is_number()) fail(ErrorKind::kParse, field + " must be a number");
    return v.get<double>();
  }
  static long long as_integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) fail(ErrorKind::kParse, field + " must be an integer");
    return v.get<long long>();
  }
  static std::vector<int> as_int_list(const json& v, const std::string& field) {
    if (!v.is_array()) fail(ErrorKind::kParse, field + " must be an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(static_cast<int>(as_integer(v[i], field + "[" + std::to_string(i) + "]")));
    }
    return out;
  }
  static std::vector<double> as_number_list(const json& v, const std::string& field) {
    if (!v.is_array()) fail(ErrorKind::kParse, field + " must be an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }

  const json& node_;
  std::string path_;
};

int positive_int(long long v, const std::string& field) {
  if (v < 1 || v > 1'000'000'000) fail(ErrorKind::kInvalidParameter, field + " must be a positive integer");
  return static_cast<int>(v);
}

std::uint64_t positive_u64(long long v, const std::string& field) {
  if (v < 1) fail(ErrorKind::kInvalidParameter, field + " must be positive");
  return static_cast<std::uint64_t>(v);
}

ProjectorMode parse_mode(const std::string& s, const std::string& field) {
  if (s == "auto") return ProjectorMode::kAuto;
  if (s == "explicit") return ProjectorMode::kExplicit;
  if (s == "implicit") return ProjectorMode::kImplicit;
  fail(ErrorKind::kParse, field + " must be one of auto, explicit, implicit");
}

GaugeConfig parse_gauge(const Section& root) {
  const auto s = root.sub("gauge", {"kind", "n", "path", "n_max", "max_charge", "max_order", "character"});
  GaugeConfig g;
  if (!s.has("kind")) fail(ErrorKind::kParse, "gauge.kind is required (cyclic, group-file or u1)");
  g.kind = s.string("kind");
  if (s.has("max_order")) g.max_order = positive_int(s.integer("max_order"), s.name("max_order"));
  if (s.has("max_charge")) g.max_charge = positive_int(s.integer("max_charge"), s.name("max_charge"));
  if (s.has("character")) g.character = static_cast<int>(s.integer("character"));
  auto refuse = [&](const char* key) {
    if (s.has(key)) fail(ErrorKind::kParse, s.name(key) + " does not apply to gauge.kind " + g.kind);
  };
  if (g.kind == "cyclic") {
    if (!s.has("n")) fail(ErrorKind::kParse, "gauge.n is required for cyclic groups");
    g.n = positive_int(s.integer("n"), s.name("n"));
    refuse("path");
    refuse("n_max");
  } else if (g.kind == "group-file") {
    if (!s.has("path")) fail(ErrorKind::kParse, "gauge.path is required for group-file");
    g.path = s.string("path");
    refuse("n");
    refuse("n_max");
  } else if (g.kind == "u1") {
    if (s.has("n_max")) g.n_max = static_cast<int>(s.integer("n_max"));
    refuse("n");
    refuse("path");
  } else {
    fail(ErrorKind::kParse, "gauge.kind must be cyclic, group-file or u1");
  }
  return g;
}

void parse_coupling(const Section& root, RunConfig& c, bool point_required) {
  if (!root.has("coupling")) {
    if (point_required) fail(ErrorKind::kParse, "coupling.g or coupling.schedule is required");
    return;
  }
  const auto s = root.sub("coupling", {"g", "schedule", "electric_prefactor", "magnetic_prefactor"});
  if (s.has("electric_prefactor")) c.electric_prefactor = s.number("electric_prefactor");
  if (s.has("magnetic_prefactor")) c.magnetic_prefactor = s.number("magnetic_prefactor");
  const bool has_g = s.has("g");
  const bool has_schedule = s.has("schedule");
  if (!point_required) {
    if (has_g || has_schedule) {
      fail(ErrorKind::kParse, "coupling.g/coupling.schedule do not apply to " + command_name(c.command) +
                                  "; couplings come from the " + command_name(c.command) + " block");
    }
    return;
  }
  if (has_g == has_schedule) fail(ErrorKind::kParse, "exactly one of coupling.g or coupling.schedule is required");
  if (has_g) {
    c.g = s.number("g");
    if (!(*c.g > 0.0)) fail(ErrorKind::kInvalidParameter, "coupling.g must be positive");
  } else {
    const auto sch = s.sub("schedule", {"a", "f"});
    if (!sch.has("a") || !sch.has("f")) fail(ErrorKind::kParse, "coupling.schedule needs both a and f");
    c.a = sch.number("a");
    c.f = sch.number("f");
    c.g = coupling_schedule(*c.a, *c.f);
  }
}

void parse_solver(const Section& root, RunConfig& c, bool seed_required) {
  if (root.has("solver")) {
    const auto s = root.sub("solver", {"k", "tol", "max_iter", "seed", "block_size", "krylov_dim"});
    if (s.has("k")) c.solver.k = positive_int(s.integer("k"), s.name("k"));
    if (s.has("tol")) {
      c.solver.tol = s.number("tol");
      if (!(c.solver.tol > 0.0)) fail(ErrorKind::kInvalidParameter, "solver.tol must be positive");
    }
    if (s.has("max_iter")) c.solver.max_iter = positive_int(s.integer("max_iter"), s.name("max_iter"));
    if (s.has("block_size")) c.solver.block_size = positive_int(s.integer("block_size"), s.name("block_size"));
    if (s.has("krylov_dim")) c.solver.krylov_dim = positive_int(s.integer("krylov_dim"), s.name("krylov_dim"));
    if (s.has("seed")) {
      const auto seed = s.integer("seed");
      if (seed < 0) fail(ErrorKind::kInvalidParameter, "solver.seed must be non-negative");
      c.solver.seed = static_cast<std::uint64_t>(seed);
      c.seed_given = true;
    }
  }
  if (seed_required && !c.seed_given) {
    fail(ErrorKind::kParse, "solver.seed is required: the Krylov start block is random");
  }
}

void parse_sector(const Section& root, RunConfig& c) {
  if (!root.has("sector")) return;
  const auto s = root.sub("sector", {"mode", "explicit_budget", "implicit_budget", "zero_winding", "static_charges"});
  if (s.has("mode")) {
    c.sector_mode = s.string("mode");
    c.sector.mode = parse_mode(c.sector_mode, s.name("mode"));
  }
  if (s.has("explicit_budget")) c.sector.explicit_budget = positive_u64(s.integer("explicit_budget"), s.name("explicit_budget"));
  if (s.has("implicit_budget")) c.sector.implicit_budget = positive_u64(s.integer("implicit_budget"), s.name("implicit_budget"));
  if (s.has("zero_winding")) c.sector.zero_winding = s.boolean("zero_winding");
  if (s.has("static_charges")) c.sector.static_charges = Section::as_int_list(s.raw("static_charges"), s.name("static_charges"));
}

std::vector<int> parse_dims(const json& v, const std::string& field) {
  auto dims = Section::as_int_list(v, field);
  if (dims.size() != 2 && dims.size() != 3) fail(ErrorKind::kInvalidParameter, field + " must have 2 or 3 entries");
  return dims;
}

void parse_scan(const Section& root, RunConfig& c) {
  if (!root.has("scan")) fail(ErrorKind::kParse, "scan block is required for the scan command");
  const auto s = root.sub("scan", {"points", "g", "schedule", "dims", "degeneracy_tol"});
  if (s.has("degeneracy_tol")) c.degeneracy_tol = s.number("degeneracy_tol");
  const int forms = static_cast<int>(s.has("points")) + static_cast<int>(s.has("g")) + static_cast<int>(s.has("schedule"));
  if (forms != 1) fail(ErrorKind::kParse, "scan needs exactly one of scan.points, scan.g or scan.schedule");

  std::vector<std::vector<int>> dims_list;
  if (s.has("dims")) {
    if (s.has("points")) fail(ErrorKind::kParse, "scan.dims does not combine with scan.points");
    const auto& d = s.raw("dims");
    if (!d.is_array()) fail(ErrorKind::kParse, "scan.dims must be an array of lattice shapes");
    for (std::size_t i = 0; i < d.size(); ++i) dims_list.push_back(parse_dims(d[i], "scan.dims[" + std::to_string(i) + "]"));
  } else if (!c.dims.empty()) {
    dims_list.push_back(c.dims);
  }

  auto need_dims = [&](const std::string& field) {
    if (dims_list.empty()) fail(ErrorKind::kParse, field + " needs lattice.dims or scan.dims");
  };
  if (s.has("points")) {
    const auto& pts = s.raw("points");
    if (!pts.is_array()) fail(ErrorKind::kParse, "scan.points must be an array");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Section p(pts[i], "scan.points[" + std::to_string(i) + "]", {"dims", "g", "a", "f"});
      GridPoint gp;
      if (p.has("dims")) {
        gp.dims = parse_dims(p.raw("dims"), p.name("dims"));
      } else {
        if (c.dims.empty()) fail(ErrorKind::kParse, p.name("dims") + " is required without lattice.dims");
        gp.dims = c.dims;
      }
      if (p.has("g")) gp.g = p.number("g");
      if (p.has("a")) gp.a = p.number("a");
      if (p.has("f")) gp.f = p.number("f");
      c.grid.push_back(gp);
    }
  } else if (s.has("g")) {
    need_dims("scan.g");
    const auto gs = Section::as_number_list(s.raw("g"), "scan.g");
    for (const auto& d : dims_list) {
      for (double g : gs) c.grid.push_back({d, g, {}, {}});
    }
  } else {
    need_dims("scan.schedule");
    const auto sch = s.sub("schedule", {"a", "f"});
    if (!sch.has("a") || !sch.has("f")) fail(ErrorKind::kParse, "scan.schedule needs a (list) and f");
    const double f = sch.number("f");
    const auto as = Section::as_number_list(sch.raw("a"), sch.name("a"));
    for (const auto& d : dims_list) {
      for (double a : as) c.grid.push_back({d, {}, a, f});
    }
  }
  // Couplings are part of the configuration: a bad one rejects the run.
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    try {
      const double g = resolve_coupling(c.grid[i]);
      if (!(g > 0.0)) throw Error(ErrorKind::kInvalidParameter, "g must be positive");
    } catch (const Error& e) {
      throw Error(e.kind(), "scan point " + std::to_string(i) + ": " + e.what());
    }
  }
}

void parse_classical(const Section& root, RunConfig& c) {
  if (!root.has("classical")) return;
  const auto s = root.sub("classical", {"initial", "mode", "amplitude", "seed", "dt", "steps", "sample_every"});
  auto& k = c.classical;
  if (s.has("initial")) k.initial = s.string("initial");
  if (k.initial != "zero" && k.initial != "mode" && k.initial != "random" && k.initial != "uniform_flux") {
    fail(ErrorKind::kParse, "classical.initial must be zero, mode, random or uniform_flux");
  }
  if (s.has("mode")) k.mode = static_cast<int>(s.integer("mode"));
  if (s.has("amplitude")) k.amplitude = s.number("amplitude");
  if (s.has("seed")) {
    const auto seed = s.integer("seed");
    if (seed < 0) fail(ErrorKind::kInvalidParameter, "classical.seed must be non-negative");
    k.seed = static_cast<std::uint64_t>(seed);
  }
  if (s.has("dt")) {
    k.dt = s.number("dt");
    if (!(*k.dt > 0.0)) fail(ErrorKind::kInvalidParameter, "classical.dt must be positive");
  }
  if (s.has("steps")) {
    k.steps = static_cast<long>(s.integer("steps"));
    if (k.steps < 0) fail(ErrorKind::kInvalidParameter, "classical.steps must be non-negative");
  }
  if (s.has("sample_every")) k.sample_every = positive_int(s.integer("sample_every"), s.name("sample_every"));
}

void parse_perturb(const Section& root, RunConfig& c) {
  if (!root.has("perturb")) return;
  const auto s = root.sub("perturb", {"n_max", "g", "k", "zero_winding"});
  auto& p = c.perturb;
  if (s.has("n_max")) {
    const auto& v = s.raw("n_max");
    p.n_max = v.is_array() ? Section::as_int_list(v, "perturb.n_max")
                           : std::vector<int>{static_cast<int>(Section::as_integer(v, "perturb.n_max"))};
  }
  if (s.has("g")) {
    const auto& v = s.raw("g");
    p.g = v.is_array() ? Section::as_number_list(v, "perturb.g") : std::vector<double>{Section::as_number(v, "perturb.g")};
  }
  if (s.has("k")) p.k = positive_int(s.integer("k"), s.name("k"));
  if (s.has("zero_winding")) p.zero_winding = s.boolean("zero_winding");
  for (double g : p.g) {
    if (!(g > 0.0)) fail(ErrorKind::kInvalidParameter, "perturb.g values must be positive");
  }
}

void parse_oracle(const Section& root, RunConfig& c) {
  if (!root.has("oracle")) return;
  const auto s = root.sub("oracle", {"space", "cap", "export"});
  if (s.has("space")) c.oracle.space = s.string("space");
  if (c.oracle.space != "sector" && c.oracle.space != "full") fail(ErrorKind::kParse, "oracle.space must be sector or full");
  if (s.has("cap")) c.oracle.cap = positive_u64(s.integer("cap"), s.name("cap"));
  if (s.has("export")) c.oracle.export_operator = s.boolean("export");
}

void parse_output(const Section& root, RunConfig& c) {
  if (!root.has("output")) return;
  const auto s = root.sub("output", {"directory", "formats", "timing"});
  if (s.has("directory")) c.output.directory = s.string("directory");
  if (s.has("formats")) c.output.formats = s.string("formats");
  if (c.output.formats != "records" && c.output.formats != "csv" && c.output.formats != "both") {
    fail(ErrorKind::kParse, "output.formats must be records, csv or both");
  }
  if (s.has("timing")) c.output.timing = s.boolean("timing");
}

void reject_block(const Section& root, const char* key, Command command) {
  if (root.has(key)) fail(ErrorKind::kParse, std::string(key) + " block does not apply to " + command_name(command));
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "spectrum") return Command::kSpectrum;
  if (name == "scan") return Command::kScan;
  if (name == "classical") return Command::kClassical;
  if (name == "perturb") return Command::kPerturb;
  if (name == "oracle") return Command::kOracle;
  fail(ErrorKind::kParse, "unknown command " + name);
}

std::string command_name(Command c) {
  switch (c) {
    case Command::kSpectrum: return "spectrum";
    case Command::kScan: return "scan";
    case Command::kClassical: return "classical";
    case Command::kPerturb: return "perturb";
    case Command::kOracle: return "oracle";
  }
  return "?";
}

RunConfig parse_config(const json& doc, Command command) {
  const Section root(doc, "", {"gauge", "lattice", "coupling", "solver", "sector", "spectrum", "scan", "classical",
                               "perturb", "oracle", "output", "threads"});
  RunConfig c;
  c.command = command;
  if (root.has("threads")) c.threads = positive_int(root.integer("threads"), "threads");
  if (root.has("lattice")) {
    const auto l = root.sub("lattice", {"dims"});
    if (l.has("dims")) c.dims = parse_dims(l.raw("dims"), "lattice.dims");
  }
  if (root.has("gauge")) c.gauge = parse_gauge(root);

  const bool needs_gauge = command == Command::kSpectrum || command == Command::kScan || command == Command::kOracle;
  if (needs_gauge && !c.gauge) fail(ErrorKind::kParse, "gauge block is required for " + command_name(command));
  if ((command == Command::kClassical || command == Command::kPerturb) && c.gauge && c.gauge->kind != "u1") {
    fail(ErrorKind::kUnsupportedStructure, command_name(command) + " needs a compact abelian (u1) gauge structure");
  }
  if (command != Command::kScan && command != Command::kPerturb && c.dims.empty()) {
    fail(ErrorKind::kParse, "lattice.dims is required");
  }
  if (command == Command::kPerturb && c.dims.empty()) fail(ErrorKind::kParse, "lattice.dims is required");

  const bool point_coupling = command == Command::kSpectrum || command == Command::kClassical || command == Command::kOracle;
  parse_coupling(root, c, point_coupling);
  const bool stochastic = command == Command::kSpectrum || command == Command::kScan || command == Command::kPerturb;
  parse_solver(root, c, stochastic);
  parse_sector(root, c);
  parse_output(root, c);

  if (root.has("spectrum")) {
    if (command != Command::kSpectrum) reject_block(root, "spectrum", command);
    const auto s = root.sub("spectrum", {"degeneracy_tol"});
    if (s.has("degeneracy_tol")) c.degeneracy_tol = s.number("degeneracy_tol");
  }
  if (command == Command::kScan) {
    parse_scan(root, c);
  } else {
    reject_block(root, "scan", command);
  }
  if (command == Command::kClassical) {
    parse_classical(root, c);
    if (c.classical.initial == "random" && !c.classical.seed) {
      fail(ErrorKind::kParse, "classical.seed is required for random initial data");
    }
  } else {
    reject_block(root, "classical", command);
  }
  if (command == Command::kPerturb) {
    parse_perturb(root, c);
  } else {
    reject_block(root, "perturb", command);
  }
  if (command == Command::kOracle) {
    parse_oracle(root, c);
  } else {
    reject_block(root, "oracle", command);
  }
  if (c.degeneracy_tol && !(*c.degeneracy_tol > 0.0)) fail(ErrorKind::kInvalidParameter, "degeneracy_tol must be positive");
  if (c.gauge) make_structure(*c.gauge);  // validates the structure eagerly
  return c;
}

RunConfig load_config(const std::filesystem::path& path, Command command) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kParse, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParse, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  // Group files are looked up relative to the config.
  if (doc.is_object() && doc.contains("gauge") && doc["gauge"].is_object() && doc["gauge"].contains("path") &&
      doc["gauge"]["path"].is_string()) {
    std::filesystem::path p = doc["gauge"]["path"].get<std::string>();
    if (p.is_relative()) doc["gauge"]["path"] = (path.parent_path() / p).lexically_normal().string();
  }
  return parse_config(doc, command);
}

GaugeStructure make_structure(const GaugeConfig& g) {
  if (g.kind == "cyclic") return GaugeStructure(make_cyclic_group(g.n, g.max_order), g.character);
  if (g.kind == "group-file") {
    if (!std::filesystem::exists(g.path)) fail(ErrorKind::kParse, "gauge.path " + g.path + " does not exist");
    return GaugeStructure(load_group_file(g.path, g.max_order), g.character);
  }
  return GaugeStructure(TruncatedU1(g.n_max, g.max_charge), g.character);
}

json resolved_json(const RunConfig& c) {
  json j;
  j["command"] = command_name(c.command);
  if (c.gauge) {
    const auto& g = *c.gauge;
    json gj{{"kind", g.kind}, {"character", g.character}};
    if (g.kind == "cyclic") {
      gj["n"] = g.n;
      gj["max_order"] = g.max_order;
    } else if (g.kind == "group-file") {
      gj["path"] = g.path;
      gj["max_order"] = g.max_order;
    } else {
      gj["n_max"] = g.n_max;
      gj["max_charge"] = g.max_charge;
    }
    gj["id"] = make_structure(g).id();
    j["gauge"] = gj;
  }
  j["lattice"] = {{"dims", c.dims}};
  json coupling{{"g", optional_number(c.g)},
                {"electric_prefactor", optional_number(c.electric_prefactor)},
                {"magnetic_prefactor", optional_number(c.magnetic_prefactor)}};
  if (c.a) coupling["schedule"] = {{"a", *c.a}, {"f", *c.f}};
  j["coupling"] = coupling;
  j["solver"] = {{"k", c.solver.k},
                 {"tol", c.solver.tol},
                 {"max_iter", c.solver.max_iter},
                 {"seed", c.seed_given ? json(c.solver.seed) : json(nullptr)},
                 {"block_size", c.solver.block_size},
                 {"krylov_dim", c.solver.krylov_dim}};
  j["sector"] = {{"mode", c.sector_mode},
                 {"explicit_budget", c.sector.explicit_budget},
                 {"implicit_budget", c.sector.implicit_budget},
                 {"zero_winding", c.sector.zero_winding},
                 {"static_charges", c.sector.static_charges}};
  j["degeneracy_tol"] = optional_number(c.degeneracy_tol);
  if (c.command == Command::kScan) {
    json pts = json::array();
    for (const auto& p : c.grid) {
      pts.push_back({{"dims", p.dims}, {"g", optional_number(p.g)}, {"a", optional_number(p.a)}, {"f", optional_number(p.f)}});
    }
    j["scan"] = {{"points", pts}};
  }
  if (c.command == Command::kClassical) {
    const auto& k = c.classical;
    j["classical"] = {{"initial", k.initial},
                      {"mode", k.mode},
                      {"amplitude", k.amplitude},
                      {"seed", k.seed ? json(*k.seed) : json(nullptr)},
                      {"dt", optional_number(k.dt)},
                      {"steps", k.steps},
                      {"sample_every", k.sample_every}};
  }
  if (c.command == Command::kPerturb) {
    j["perturb"] = {{"n_max", c.perturb.n_max}, {"g", c.perturb.g}, {"k", c.perturb.k}, {"zero_winding", c.perturb.zero_winding}};
  }
  if (c.command == Command::kOracle) {
    j["oracle"] = {{"space", c.oracle.space}, {"cap", c.oracle.cap}, {"export", c.oracle.export_operator}};
  }
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}, {"timing", c.output.timing}};
  j["threads"] = c.threads;
  return j;
}

}  // namespace latgauge::cli
