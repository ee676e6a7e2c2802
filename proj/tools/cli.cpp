#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "sgq/duality.hpp"
#include "sgq/logical.hpp"
#include "sgq/observables.hpp"
#include "sgq/protocols.hpp"
#include "sgq/spectral.hpp"

namespace sgq::cli {

namespace {

using nlohmann::json;

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

const json& require(const json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string(where) + ": missing \"" + key + "\"");
  return j.at(key);
}

double coupling_or(const json& couplings, const char* key, double fallback) {
  return get_or<double>(couplings, key, fallback);
}

std::vector<double> number_list(const json& j, const char* where) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(where) + ": expected a number or non-empty array");
  return j.get<std::vector<double>>();
}

Schedule glue_schedule(const json& p, const CouplingAssignment& base, double duration) {
  Schedule s;
  s.duration = duration;
  s.dt = get_or<double>(p, "dt", 0.25);
  s.krylov_dim = get_or<int>(p, "krylov_dim", 20);
  const RampShape shape = ramp_shape_from(get_or<std::string>(p, "shape", "smoothstep"));
  const json& targets = require(p, "glue", "protocol");
  for (const auto& [cls, v] : targets.items()) {
    auto it = base.find(cls);
    if (it == base.end()) throw ConfigError("glue coupling '" + cls + "' is not part of the network");
    s.segments.push_back({cls, shape, it->second, v.get<double>()});
  }
  return s;
}

json eigen_json(const EigenSolution& sol) {
  return {{"eigenvalues", sol.eigenvalues}, {"residuals", sol.residuals}};
}

// Observable averaged over a set of states (a basis of the ground space).
template <class F>
double ground_average(const std::vector<StateVector>& g, F f) {
  double acc = 0;
  for (const auto& s : g) acc += f(s);
  return acc / static_cast<double>(g.size());
}

std::string csv_of(const std::vector<ProtocolReport>& reports) {
  std::ostringstream os;
  write_csv_header(os);
  for (const auto& r : reports) write_csv_row(os, r);
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << text;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  try {
    c.raw = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!c.raw.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"seed", "system", "protocol", "scan", "duality", "ground", "output"};
  for (const auto& [k, v] : c.raw.items())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ConfigError("unknown config section '" + k + "'");
  try {
    c.seed = get_or<std::uint64_t>(c.raw, "seed", 12345);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("seed: ") + e.what());
  }
  auto section = [&](const char* k) { return c.raw.contains(k) ? c.raw.at(k) : json::object(); };
  c.system = section("system");
  c.protocol = section("protocol");
  c.scan = section("scan");
  c.duality = section("duality");
  c.ground = section("ground");
  c.output = section("output");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

SystemSpec build_system(const json& sys) {
  const std::string model = require(sys, "model", "system").get<std::string>();
  const json couplings = get_or<json>(sys, "couplings", json::object());
  if (!couplings.is_object()) throw ConfigError("system.couplings must be an object");
  const bool pbc = get_or<bool>(sys, "pbc", true);
  SystemSpec spec;
  spec.sz = 0.0;
  if (model == "chain_j1j2") {
    spec.layout = chain_j1j2(require(sys, "L", "system").get<int>(), coupling_or(couplings, coupling::leg, 1.0),
                             coupling_or(couplings, coupling::second, 0.0), pbc);
  } else if (model == "chain_staggered") {
    const double J = coupling_or(couplings, coupling::leg, 1.0);
    if (J == 0) throw ConfigError("chain_staggered needs a nonzero J_leg");
    spec.layout = chain_staggered(require(sys, "L", "system").get<int>(), J,
                                  coupling_or(couplings, coupling::stagger, 0.0) / J, pbc);
  } else if (model == "ladder") {
    spec.layout = ladder(require(sys, "L", "system").get<int>(), coupling_or(couplings, coupling::leg, 1.0),
                         coupling_or(couplings, coupling::second, 0.0), coupling_or(couplings, coupling::rung, 0.0),
                         coupling_or(couplings, coupling::diag, 0.0), pbc);
  } else if (model == "tfim_chain") {
    spec.layout = tfim_chain(require(sys, "L", "system").get<int>(), coupling_or(couplings, coupling::ising, 1.0), pbc);
    spec.sz.reset();
  } else if (model == "ring_network") {
    std::vector<RingSpec> rings;
    for (const auto& r : require(sys, "rings", "system"))
      rings.push_back({r.at("L").get<int>(), get_or<double>(r, "J1", 1.0), get_or<double>(r, "J2", 0.5)});
    std::vector<Corner> corners;
    for (const auto& c : get_or<json>(sys, "corners", json::array()))
      corners.push_back({c.at("rings").get<std::vector<int>>(), c.at("anchors").get<std::vector<int>>()});
    spec.layout = ring_network(rings, corners);
  } else {
    throw ConfigError("unknown model '" + model + "'");
  }
  spec.couplings = spec.layout.couplings;
  for (const auto& [k, v] : couplings.items()) {
    if (!spec.couplings.contains(k)) throw ConfigError("coupling '" + k + "' is not valid for model " + model);
    spec.couplings[k] = v.get<double>();
  }
  if (sys.contains("sz")) {
    if (sys.at("sz").is_null()) spec.sz.reset();
    else if (model == "tfim_chain") throw ConfigError("tfim_chain has no S^z sector");
    else spec.sz = sys.at("sz").get<double>();
  }
  return spec;
}

CommandOutput cmd_ground(const ExperimentConfig& cfg) {
  const SystemSpec sys = build_system(cfg.system);
  const auto basis = build_basis(sys.layout.n_sites(), sys.sz);
  const SparseOperator H = assemble(sys.layout, sys.couplings, basis);
  const int k = std::min<int>(get_or<int>(cfg.ground, "n_states", 4), static_cast<int>(basis->dim()));
  LanczosOptions lo;
  lo.seed = cfg.seed;
  lo.krylov_dim = get_or<int>(cfg.ground, "krylov_dim", 80);
  lo.max_restarts = get_or<int>(cfg.ground, "max_restarts", 400);
  const EigenSolution sol = lowest_eigenpairs(H, k, get_or<double>(cfg.ground, "tol", 1e-10), lo);
  const int gsd = degeneracy(sol, get_or<double>(cfg.ground, "split_tol", -1.0));
  const std::vector<StateVector> g(sol.eigenvectors.begin(), sol.eigenvectors.begin() + gsd);

  json obs = json::object();
  const auto& lay = sys.layout;
  if (lay.kind == "chain_j1j2" || lay.kind == "chain_staggered") {
    obs["dimer_order"] = ground_average(g, [&](const StateVector& s) { return dimer_order(s, lay, 0); });
    if (lay.pbc && sys.sz && *sys.sz == 0.0) {
      std::vector<int> ring(static_cast<std::size_t>(lay.n_sites()));
      std::iota(ring.begin(), ring.end(), 0);
      const auto F = twist_operator(basis, ring);
      obs["twist_re"] = ground_average(g, [&](const StateVector& s) { return twist_expectation(s, F).real(); });
    }
  } else if (lay.kind == "ladder") {
    obs["dimer_leg0"] = ground_average(g, [&](const StateVector& s) { return dimer_order(s, lay, 0); });
    obs["dimer_leg1"] = ground_average(g, [&](const StateVector& s) { return dimer_order(s, lay, 1); });
    obs["rung_singlet_density"] = ground_average(g, [&](const StateVector& s) { return rung_singlet_density(s, lay); });
    obs["string_order"] = ground_average(g, [&](const StateVector& s) { return string_order(s, lay, 0, lay.length / 2); });
  } else if (lay.kind == "ring_network" && sys.sz && *sys.sz == 0.0) {
    for (std::size_t r = 0; r < lay.rings.size(); ++r) {
      const auto F = twist_operator(basis, lay.rings[r]);
      obs["twist_re_ring" + std::to_string(r)] =
          ground_average(g, [&](const StateVector& s) { return twist_expectation(s, F).real(); });
    }
  }
  json rep = {{"command", "ground"},
              {"model", lay.kind},
              {"n_sites", lay.n_sites()},
              {"dim", basis->dim()},
              {"couplings", sys.couplings},
              {"seed", cfg.seed},
              {"gsd", gsd},
              {"e0", sol.eigenvalues.front()},
              {"observables", obs},
              {"layout", to_json(lay)}};
  rep["sz"] = sys.sz ? json(*sys.sz) : json(nullptr);
  rep.update(eigen_json(sol));
  return {rep, ""};
}

CommandOutput cmd_protocol(const ExperimentConfig& cfg) {
  const std::string name = require(cfg.protocol, "name", "protocol").get<std::string>();
  const double threshold = get_or<double>(cfg.protocol, "leakage_threshold", 0.2);
  std::vector<ProtocolReport> reports;
  json extra = json::object();

  if (name == "teleport-h") {
    const int n = get_or<int>(cfg.protocol, "n_states", 100);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss;
    double max_err = 0, max_pdev = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::Vector2cd psi(cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng)));
      psi.normalize();
      const Eigen::Vector2cd want = gates::hadamard() * psi;
      for (int m = 0; m < 2; ++m) {
        const auto r = run_teleport_h(psi, m);
        max_err = std::max(max_err, (r.output - want).norm());
        max_pdev = std::max(max_pdev, std::abs(r.probability - 0.5));
      }
    }
    ProtocolReport r;
    r.protocol = "teleport-h";
    r.parameters = {{"n_states", n}, {"seed", cfg.seed}};
    // Logical action of the corrected circuit on the basis states.
    Mat M(2, 2);
    for (int j = 0; j < 2; ++j) M.col(j) = run_teleport_h(Eigen::Vector2cd::Unit(j), 0).output;
    r.action = action_from_matrix(M);
    r.target = gates::hadamard();
    r.corrected = M;
    r.fidelity = gate_fidelity(M, r.target);
    r.leakage_threshold = threshold;
    r.diagnostics = {{"max_output_error", max_err}, {"max_probability_deviation", max_pdev}};
    reports.push_back(r);
  } else if (name == "pump" || name == "twist") {
    const SystemSpec sys = build_system(cfg.system);
    if (sys.layout.kind != "chain_j1j2" && sys.layout.kind != "ring_network")
      throw ConfigError("pump/twist need a ring system (chain_j1j2 with pbc or ring_network)");
    if (!sys.layout.pbc) throw ConfigError("pump/twist need periodic rings");
    const auto basis = build_basis(sys.layout.n_sites(), 0.0);
    std::vector<std::vector<int>> rings = sys.layout.rings;
    if (rings.empty()) {
      rings.emplace_back(static_cast<std::size_t>(sys.layout.n_sites()));
      std::iota(rings[0].begin(), rings[0].end(), 0);
    }
    const LogicalCode code = dimer_code(basis, rings);
    reports.push_back(name == "pump" ? run_pump(code, get_or<int>(cfg.protocol, "shift", 1), threshold)
                                     : run_twist(code, get_or<int>(cfg.protocol, "times", 1), threshold));
  } else if (name == "shuffle") {
    const SystemSpec sys = build_system(cfg.system);
    CouplingAssignment pc = sys.couplings, pr = sys.couplings;
    for (const auto& [k, v] : require(cfg.protocol, "point_c", "protocol").items()) pc[k] = v.get<double>();
    for (const auto& [k, v] : require(cfg.protocol, "point_r", "protocol").items()) pr[k] = v.get<double>();
    ShuffleOptions so;
    so.leakage_threshold = threshold;
    so.check_phases = get_or<bool>(cfg.protocol, "check_phases", true);
    const RampShape shape = ramp_shape_from(get_or<std::string>(cfg.protocol, "shape", "smoothstep"));
    for (double tau : number_list(require(cfg.protocol, "durations", "protocol"), "protocol.durations")) {
      Schedule s = linear_path_schedule(pc, pr, tau, shape);
      s.dt = get_or<double>(cfg.protocol, "dt", 0.25);
      s.krylov_dim = get_or<int>(cfg.protocol, "krylov_dim", 20);
      reports.push_back(run_shuffle(sys.layout, pc, pr, s, so));
      so.check_phases = false;  // endpoints do not change across the grid
    }
  } else if (name == "gtg2" || name == "gtg3") {
    const SystemSpec sys = build_system(cfg.system);
    GtgOptions go;
    go.free_time = get_or<double>(cfg.protocol, "free_time", 0.0);
    go.twist = twist_mode_from(get_or<std::string>(cfg.protocol, "twist", "flux"));
    go.twist_time = get_or<double>(cfg.protocol, "twist_time", 50.0);
    go.calibration = calibration_from(get_or<std::string>(cfg.protocol, "calibration", "phases"));
    go.leakage_threshold = threshold;
    for (double tau : number_list(require(cfg.protocol, "durations", "protocol"), "protocol.durations"))
      reports.push_back(run_gtg(sys.layout, sys.couplings, glue_schedule(cfg.protocol, sys.couplings, tau),
                                name == "gtg2" ? 2 : 3, go));
    std::vector<double> leak;
    for (const auto& r : reports) leak.push_back(r.action.leakage);
    extra["leakage_by_duration"] = leak;
  } else {
    throw ConfigError("unknown protocol '" + name + "'");
  }

  json rep = {{"command", "protocol"}, {"protocol", name}, {"seed", cfg.seed}, {"reports", json::array()}};
  bool flagged = false;
  for (const auto& r : reports) {
    rep["reports"].push_back(to_json(r));
    flagged = flagged || r.flagged;
  }
  rep["flagged"] = flagged;
  if (!extra.empty()) rep["summary"] = extra;
  return {rep, csv_of(reports)};
}

CommandOutput cmd_phase_scan(const ExperimentConfig& cfg) {
  const SystemSpec sys = build_system(cfg.system);
  if (sys.layout.kind != "ladder") throw ConfigError("phase-scan needs a ladder system");
  std::vector<ScanAxis> axes;
  for (const auto& a : get_or<json>(cfg.scan, "axes", json::array())) {
    ScanAxis ax;
    ax.coupling = require(a, "coupling", "scan.axes").get<std::string>();
    if (!sys.couplings.contains(ax.coupling)) throw ConfigError("scan coupling '" + ax.coupling + "' is not a ladder coupling");
    if (a.contains("values")) {
      ax.values = number_list(a.at("values"), "scan.axes.values");
    } else {
      const auto r = require(a, "range", "scan.axes").get<std::vector<double>>();
      if (r.size() != 3 || r[2] < 1) throw ConfigError("scan range must be [start, stop, count]");
      const int n = static_cast<int>(r[2]);
      for (int i = 0; i < n; ++i) ax.values.push_back(n == 1 ? r[0] : r[0] + (r[1] - r[0]) * i / (n - 1));
    }
    axes.push_back(std::move(ax));
  }
  if (axes.size() > 2) throw ConfigError("phase-scan takes at most two axes");
  ClassifierOptions co;
  co.threshold = get_or<double>(cfg.scan, "threshold", 0.05);
  co.degeneracy_window = get_or<double>(cfg.scan, "degeneracy_window", 1e-6);
  co.pbc = sys.layout.pbc;
  const auto points = phase_scan(sys.couplings, axes, sys.layout.length, co);
  json rows = json::array();
  for (const auto& p : points)
    rows.push_back({{"couplings", p.couplings}, {"observables", p.observables}, {"label", to_string(p.label)}});
  std::ostringstream csv;
  write_phase_csv(csv, points);
  return {{{"command", "phase-scan"}, {"L", sys.layout.length}, {"threshold", co.threshold}, {"points", rows}},
          csv.str()};
}

CommandOutput cmd_duality_check(const ExperimentConfig& cfg) {
  std::vector<int> sizes;
  for (double L : number_list(require(cfg.duality, "L", "duality"), "duality.L")) sizes.push_back(static_cast<int>(L));
  const auto lambdas = number_list(require(cfg.duality, "lambdas", "duality"), "duality.lambdas");
  json pairs = json::array();
  std::ostringstream csv;
  csv << "L,lambda,max_deviation,e0_original,e0_dual\n" << std::setprecision(17);
  double worst = 0;
  for (int L : sizes)
    for (double lam : lambdas) {
      const DualPair p = spectrum_duality_check(L, lam);
      worst = std::max(worst, p.max_deviation);
      pairs.push_back({{"L", L},
                       {"lambda", lam},
                       {"sector", p.sector},
                       {"max_deviation", p.max_deviation},
                       {"original", p.original},
                       {"dual", p.dual}});
      csv << L << "," << lam << "," << p.max_deviation << "," << p.original.front() << "," << p.dual.front() << "\n";
    }
  json rep = {{"command", "duality-check"}, {"pairs", pairs}, {"max_deviation", worst}};
  if (cfg.duality.contains("scan_lambdas")) {
    json scan = json::array();
    const int L = sizes.front();
    for (double lam : number_list(cfg.duality.at("scan_lambdas"), "duality.scan_lambdas")) {
      const auto od = order_disorder(L, lam);
      scan.push_back({{"lambda", lam}, {"order", od.order}, {"disorder", od.disorder}});
    }
    rep["order_disorder"] = scan;
  }
  return {rep, csv.str()};
}

int run(int argc, char** argv) {
  CLI::App app{"Ring and ladder logical-qubit simulations"};
  app.require_subcommand(1);
  int threads = 0;
  int verbosity = 0;
  std::string json_path, csv_path;
  app.add_option("--threads", threads, "Worker threads (default: SGQ_THREADS or all cores)");
  app.add_flag("-v,--verbose", verbosity, "Log progress to standard error");
  std::string config_path;
  struct Sub {
    const char* name;
    const char* help;
    CommandOutput (*fn)(const ExperimentConfig&);
  };
  const Sub subs[] = {{"ground", "Lowest eigenpairs and ground-space observables", cmd_ground},
                      {"protocol", "Run a logical-gate protocol", cmd_protocol},
                      {"phase-scan", "Classify ladder ground states over a coupling grid", cmd_phase_scan},
                      {"duality-check", "Ising duality spectra", cmd_duality_check}};
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("config", config_path, "Experiment JSON")->required();
    sc->add_option("--json", json_path, "Write the JSON report here (default: config output.json or stdout)");
    sc->add_option("--csv", csv_path, "Write the CSV table here (default: config output.csv)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }
  if (threads <= 0) {
    if (const char* env = std::getenv("SGQ_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  set_num_threads(threads);

  const Sub* chosen = nullptr;
  for (const auto& s : subs)
    if (app.got_subcommand(s.name)) chosen = &s;
  try {
    const ExperimentConfig cfg = load_config(config_path);
    if (verbosity > 0) std::cerr << "sgq " << chosen->name << ": " << config_path << " (" << threads << " threads)\n";
    CommandOutput out;
    try {
      out = chosen->fn(cfg);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    out.report["config"] = cfg.raw;
    if (json_path.empty()) json_path = get_or<std::string>(cfg.output, "json", "");
    if (csv_path.empty()) csv_path = get_or<std::string>(cfg.output, "csv", "");
    const std::string text = out.report.dump(2) + "\n";
    if (json_path.empty()) std::cout << text;
    else write_text(json_path, text);
    if (!csv_path.empty() && !out.csv.empty()) write_text(csv_path, out.csv);
    return ok;
  } catch (const ConfigError& e) {
    std::cerr << "sgq: " << e.what() << "\n";
    return config_error;
  } catch (const NumericalError& e) {
    std::cerr << "sgq: numerical failure: " << e.what() << "\n";
    return numerical_failure;
  } catch (const Error& e) {
    std::cerr << "sgq: " << e.what() << "\n";
    return config_error;
  }
}

}  // namespace sgq::cli
