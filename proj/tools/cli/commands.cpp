#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "latgauge/classical.hpp"
#include "latgauge/perturb.hpp"

namespace latgauge::cli {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string dims_label(const std::vector<int>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "x" : "") + std::to_string(dims[i]);
  return s;
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Record and CSV sinks for one command; records are flushed line by line so
// an interrupted run keeps everything emitted so far.
class Sinks {
 public:
  Sinks(const RunConfig& config, const std::string& stem) : config_(config) {
    const std::filesystem::path dir = config.output.directory;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::kResource, "cannot create output directory " + dir.string() + ": " + ec.message());
    const auto& f = config.output.formats;
    if (f == "records" || f == "both") open(records_, dir / (stem + ".jsonl"));
    if (f == "csv" || f == "both") open(csv_, dir / (stem + ".csv"));
    resolved_ = resolved_json(config);
  }

  void record(json body) {
    if (!records_.is_open()) return;
    json line{{"format_version", kFormatVersion},
              {"command", command_name(config_.command)},
              {"index_convention", LatticeGeometry::kIndexConvention},
              {"config", resolved_}};
    line.update(body);
    records_ << line.dump() << '\n';
    records_.flush();
  }

  void csv_line(const std::string& line) {
    if (csv_.is_open()) csv_ << line << '\n';
  }
  [[nodiscard]] bool csv_enabled() const { return csv_.is_open(); }
  std::ofstream& csv_stream() { return csv_; }

 private:
  static void open(std::ofstream& s, const std::filesystem::path& path) {
    s.open(path, std::ios::binary | std::ios::trunc);
    if (!s) throw Error(ErrorKind::kResource, "cannot write " + path.string());
  }

  const RunConfig& config_;
  json resolved_;
  std::ofstream records_;
  std::ofstream csv_;
};

CouplingParams coupling_for(const RunConfig& c, double g) {
  auto p = CouplingParams::from_g(g);
  if (c.electric_prefactor) p.electric_prefactor = *c.electric_prefactor;
  if (c.magnetic_prefactor) p.magnetic_prefactor = *c.magnetic_prefactor;
  p.validate();
  return p;
}

ScanConfig scan_config(const RunConfig& c) {
  ScanConfig s{.structure = make_structure(*c.gauge)};
  s.sector = c.sector;
  s.solver = c.solver;
  s.electric_prefactor = c.electric_prefactor;
  s.magnetic_prefactor = c.magnetic_prefactor;
  s.degeneracy_tol = c.degeneracy_tol;
  s.threads = c.threads;
  s.timing = c.output.timing;
  return s;
}

json record_json(const ScanRecord& r) {
  return {{"index", r.index},
          {"ok", r.ok},
          {"dims", r.dims},
          {"structure", r.structure_id},
          {"g", r.g},
          {"a", opt(r.a)},
          {"f", opt(r.f)},
          {"sector_dim", r.sector_dim},
          {"sector_mode", r.sector_mode},
          {"eigenvalues", r.eigenvalues},
          {"ground_energy", r.ok ? json(r.ground_energy) : json(nullptr)},
          {"gap", opt(r.gap)},
          {"gap_indeterminate", r.ok && !r.gap},
          {"vacuum_mult", r.vacuum_mult},
          {"splitting", r.splitting},
          {"residual", r.residual},
          {"iterations", r.iterations},
          {"seconds", r.seconds},
          {"error_kind", r.error_kind.empty() ? json(nullptr) : json(r.error_kind)},
          {"error_message", r.error_message.empty() ? json(nullptr) : json(r.error_message)},
          {"disclaimer", r.disclaimer}};
}

std::string record_csv(const ScanRecord& r) {
  std::string s = dims_label(r.dims) + ',' + num(r.g) + ',' + num(r.a) + ',' + num(r.f) + ',';
  if (r.ok) {
    s += std::to_string(r.sector_dim) + ',' + num(r.ground_energy) + ',' + num(r.gap) + ',' +
         std::to_string(r.vacuum_mult) + ',' + num(r.residual) + ',';
  } else {
    s += ",,,,,";
  }
  return s + num(r.seconds);
}

int scan_like(const RunConfig& c, const std::vector<GridPoint>& grid, const std::string& stem, std::ostream& log) {
  Sinks sinks(c, stem);
  sinks.csv_line(kScanColumns);
  const auto records = gap_scan(grid, scan_config(c), [&](const ScanRecord& r) {
    sinks.record(record_json(r));
    sinks.csv_line(record_csv(r));
    if (!r.ok) log << stem << ": point " << r.index << " failed (" << r.error_kind << "): " << r.error_message << '\n';
  });
  if (records.empty()) return kExitOk;
  const bool any_ok = std::any_of(records.begin(), records.end(), [](const ScanRecord& r) { return r.ok; });
  if (any_ok) return kExitOk;
  const auto& first = records.front();
  for (ErrorKind k : {ErrorKind::kResource, ErrorKind::kConvergence}) {
    if (first.error_kind == to_string(k)) return exit_code(k);
  }
  return kExitConfig;
}

int cmd_spectrum(const RunConfig& c, std::ostream& log) {
  GridPoint p{c.dims, {}, c.a, c.f};
  if (!c.a) p.g = c.g;
  return scan_like(c, {p}, "spectrum", log);
}

int cmd_scan(const RunConfig& c, std::ostream& log) { return scan_like(c, c.grid, "scan", log); }

ClassicalState initial_state(const RunConfig& c, const LatticeGeometry& geom, const NormalModeSet& modes) {
  const auto& k = c.classical;
  if (k.initial == "zero") return zero_state(geom);
  if (k.initial == "mode") return mode_initial_data(modes, k.mode, k.amplitude);
  if (k.initial == "random") {
    std::mt19937_64 rng(*k.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto s = zero_state(geom);
    for (auto& t : s.theta) t = wrap_angle(k.amplitude * std::numbers::pi * u(rng));
    for (auto& e : s.efield) e = k.amplitude * u(rng);
    return s;
  }
  // uniform_flux: every plaquette carries amplitude·π/2 except the last one
  // of each plane, which closes the sum so the flux pattern is realizable.
  if (geom.dimension() != 2) throw Error(ErrorKind::kInvalidParameter, "uniform_flux initial data needs d = 2");
  const Eigen::MatrixXd curl = curl_matrix(geom);
  Eigen::VectorXd target = Eigen::VectorXd::Constant(geom.num_plaquettes(), k.amplitude * std::numbers::pi / 2);
  target(geom.num_plaquettes() - 1) = -(geom.num_plaquettes() - 1) * k.amplitude * std::numbers::pi / 2;
  const Eigen::VectorXd theta = curl.completeOrthogonalDecomposition().solve(target);
  auto s = zero_state(geom);
  for (int l = 0; l < geom.num_links(); ++l) s.theta[l] = wrap_angle(theta(l));
  return s;
}

int cmd_classical(const RunConfig& c, std::ostream&) {
  const auto geom = build_lattice(c.dims);
  const auto coupling = coupling_for(c, *c.g);
  const auto modes = normal_modes(geom, coupling);
  const auto s0 = initial_state(c, geom, modes);
  const double dt = c.classical.dt.value_or(default_time_step(modes));
  Sinks sinks(c, "classical");

  const double e0 = classical_energy(s0, geom, coupling);
  const auto g0 = gauss_charges(s0, geom);
  double max_dev = 0.0, max_gauss = 0.0;
  ClassicalState end = s0;
  if (sinks.csv_enabled()) {
    end = write_trajectory_csv(sinks.csv_stream(), s0, dt, c.classical.steps, c.classical.sample_every, geom, coupling,
                               &modes);
  }
  end = evolve(s0, dt, c.classical.steps, geom, coupling, [&](const ClassicalState& cur, long) {
    const double e = classical_energy(cur, geom, coupling);
    max_dev = std::max(max_dev, std::abs(e - e0));
    const auto g = gauss_charges(cur, geom);
    for (std::size_t p = 0; p < g.size(); ++p) max_gauss = std::max(max_gauss, std::abs(g[p] - g0[p]));
  });
  sinks.record({{"dims", c.dims},
                {"g", *c.g},
                {"dt", dt},
                {"steps", c.classical.steps},
                {"time", end.time},
                {"initial_energy", e0},
                {"final_energy", classical_energy(end, geom, coupling)},
                {"max_energy_deviation", max_dev},
                {"max_relative_energy_deviation", e0 > 0.0 ? json(max_dev / e0) : json(nullptr)},
                {"max_gauss_violation", max_gauss},
                {"frequencies", modes.frequencies},
                {"zero_modes", modes.zero_mode_count}});
  return kExitOk;
}

int cmd_perturb(const RunConfig& c, std::ostream&) {
  const auto geom = build_lattice(c.dims);
  Sinks sinks(c, "perturb");
  sinks.csv_line("n_max,g,sector_dim,level,exact_energy,exact_ratio,fock_energy,fock_ratio,deviation");
  WeakCouplingOptions options;
  options.zero_winding = c.perturb.zero_winding;
  options.solver = c.solver;
  if (c.gauge) options.max_charge = c.gauge->max_charge;
  for (int n_max : c.perturb.n_max) {
    for (double g : c.perturb.g) {
      const auto t = weak_coupling_check(geom, n_max, g, c.perturb.k, options);
      json rows = json::array();
      for (const auto& r : t.rows) {
        sinks.csv_line(std::to_string(n_max) + ',' + num(g) + ',' + std::to_string(t.sector_dim) + ',' +
                       std::to_string(r.level) + ',' + num(r.exact_energy) + ',' + num(r.exact_ratio) + ',' +
                       num(r.fock_energy) + ',' + num(r.fock_ratio) + ',' + num(r.deviation));
        rows.push_back({{"level", r.level},
                        {"exact_energy", r.exact_energy},
                        {"exact_ratio", r.exact_ratio},
                        {"fock_energy", r.fock_energy},
                        {"fock_ratio", r.fock_ratio},
                        {"deviation", r.deviation}});
      }
      sinks.record({{"dims", c.dims},
                    {"n_max", n_max},
                    {"g", g},
                    {"sector_dim", t.sector_dim},
                    {"rows", rows},
                    {"max_deviation", t.max_deviation}});
    }
  }
  return kExitOk;
}

// Dimension of the requested space, saturating at cap + 1.
std::uint64_t requested_dimension(const RunConfig& c, const LatticeGeometry& geom, const GaugeStructure& s) {
  const std::uint64_t over = c.oracle.cap + 1;
  if (c.oracle.space == "full" || !s.is_finite_group()) {
    long double full = std::pow(static_cast<long double>(s.link_dimension()), geom.num_links());
    if (c.oracle.space == "full") return full > static_cast<long double>(c.oracle.cap) ? over : static_cast<std::uint64_t>(full);
    // U(1) sectors are enumerated; refuse spaces the enumeration cannot touch.
    if (full > static_cast<long double>(c.sector.explicit_budget)) {
      throw Error(ErrorKind::kResource, "U(1) product space exceeds sector.explicit_budget");
    }
    return 0;
  }
  return sector_dimension(geom, s.group(), c.sector.zero_winding);
}

int cmd_oracle(const RunConfig& c, std::ostream&) {
  const auto geom = build_lattice(c.dims);
  const auto structure = make_structure(*c.gauge);
  const std::uint64_t dim = requested_dimension(c, geom, structure);
  if (dim > c.oracle.cap) {
    throw Error(ErrorKind::kResource, "oracle dimension " + std::to_string(dim) + " exceeds the cap " +
                                          std::to_string(c.oracle.cap));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const LatticeHamiltonian h(geom, link_operators(structure), coupling_for(c, *c.g));
  SparseOperator op = [&] {
    if (c.oracle.space == "full") return h.full_operator();
    SectorOptions opts = c.sector;
    opts.mode = ProjectorMode::kExplicit;
    return h.sector_operator(GaussSector(geom, structure, opts));
  }();
  const auto eigenvalues = dense_oracle(op, c.oracle.cap);
  const double seconds =
      c.output.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  Sinks sinks(c, "oracle");
  sinks.csv_line("index,eigenvalue");
  for (std::size_t i = 0; i < eigenvalues.size(); ++i) sinks.csv_line(std::to_string(i) + ',' + num(eigenvalues[i]));
  json gap = nullptr;
  int mult = static_cast<int>(eigenvalues.size());
  if (eigenvalues.size() >= 2) {
    const auto r = mass_gap(eigenvalues, c.degeneracy_tol);
    gap = opt(r.gap);
    mult = r.vacuum_multiplicity;
  }
  sinks.record({{"dims", c.dims},
                {"structure", structure.id()},
                {"g", *c.g},
                {"space", c.oracle.space},
                {"dimension", op.dimension()},
                {"eigenvalues", eigenvalues},
                {"gap", gap},
                {"vacuum_mult", mult},
                {"seconds", seconds},
                {"method", "dense"},
                {"disclaimer", kGapDisclaimer}});
  if (c.oracle.export_operator) {
    std::ofstream out(std::filesystem::path(c.output.directory) / "operator.coo", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kResource, "cannot write operator.coo");
    op.write_coordinate(out);
  }
  return kExitOk;
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kResource: return kExitResource;
    case ErrorKind::kConvergence: return kExitConvergence;
    default: return kExitConfig;
  }
}

int run(const RunConfig& config, std::ostream& log) {
  switch (config.command) {
    case Command::kSpectrum: return cmd_spectrum(config, log);
    case Command::kScan: return cmd_scan(config, log);
    case Command::kClassical: return cmd_classical(config, log);
    case Command::kPerturb: return cmd_perturb(config, log);
    case Command::kOracle: return cmd_oracle(config, log);
  }
  return kExitConfig;
}

}  // namespace latgauge::cli
