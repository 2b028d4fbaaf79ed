#include "superdyn/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "superdyn/entangle.hpp"
#include "superdyn/evolution.hpp"
#include "superdyn/hydrogen.hpp"
#include "superdyn/jaynescummings.hpp"
#include "superdyn/liouvillian.hpp"
#include "superdyn/superprop.hpp"
#include "superdyn/superspace.hpp"

namespace superdyn::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) raise(ErrorKind::InvalidArgument, "cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) raise(ErrorKind::InvalidArgument, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_quote(cells[i]);
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  row(cells);
}

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"superop", "evolve", "propagator",
                                              "jc",      "bipartite", "validate"};
  return names;
}

namespace {

json quartic_potential(double lambda) {
  return {{"type", "polynomial"}, {"coeffs", {0.0, 0.0, 0.0, 0.0, lambda}}};
}

}  // namespace

json default_config(const std::string& subcommand) {
  if (subcommand == "superop") {
    return {{"potential", quartic_potential(0.1)},
            {"kind", "cl"},
            {"grid", {{"min", -4.0}, {"max", 4.0}, {"n", 32}}},
            {"mass", 1.0},
            {"hbar", 1.0},
            {"export_dense", false},
            {"spectrum", false},
            {"output", "superop"}};
  }
  if (subcommand == "evolve") {
    return {{"potential", quartic_potential(0.1)},
            {"kind", "cl"},
            {"grid", {{"min", -8.0}, {"max", 8.0}, {"n", 64}}},
            {"initial", {{"x0", 1.0}, {"p0", 0.0}, {"sigma_x", 0.5}, {"sigma_p", 1.0}}},
            {"t", 0.5},
            {"n_steps", 100},
            {"method", "trotter-strang"},
            {"output_every", 1},
            {"mass", 1.0},
            {"hbar", 1.0},
            {"output", "evolve"}};
  }
  if (subcommand == "propagator") {
    return {{"T", 1.0},
            {"lambda", 0.1},
            {"mass", 1.0},
            {"hbar", 1.0},
            {"points", json::array()},
            {"random", {{"count", 10}, {"seed", 1}, {"range", 1.0}}},
            {"tolerance", 1e-3},
            {"output", "propagator"}};
  }
  if (subcommand == "jc") {
    return {{"omega_e", 1.0},
            {"omega", 1.0},
            {"d", 0.05},
            {"eps", {0.0, 0.0}},
            {"eps_eegg", {0.0, 0.0}},
            {"n_max", 4},
            {"init", "e0"},
            {"t_max", 62.83185307179586},
            {"n_t", 201},
            {"coulomb",
             {{"enabled", false},
              {"excited", "2p0"},
              {"ground", "1s"},
              {"e2", 1.0},
              {"samples", 100000},
              {"seed", 1}}},
            {"output", "jc"}};
  }
  if (subcommand == "bipartite") {
    return {{"n_levels", 4},
            {"lambda", 0.01},
            {"alpha1", 0.0},
            {"alpha2", 0.0},
            {"omega", 1.0},
            {"mass", 1.0},
            {"hbar", 1.0},
            {"t_max", 5.0},
            {"n_t", 51},
            {"leak_limit", 0.0},
            {"output", "bipartite"}};
  }
  if (subcommand == "validate") {
    return {{"seed", 7}, {"output", "validate"}};
  }
  raise(ErrorKind::InvalidArgument, "unknown subcommand '" + subcommand + "'");
}

namespace {

const char* type_name(const json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

bool compatible(const json& def, const json& val) {
  if (def.is_number()) return val.is_number();
  if (def.is_string()) return val.is_string();
  if (def.is_boolean()) return val.is_boolean();
  if (def.is_array()) return val.is_array();
  if (def.is_object()) return val.is_object();
  return false;
}

json resolve_potential(const json& user, const std::string& where) {
  if (!user.is_object()) raise(ErrorKind::ParseError, where + ": potential must be an object");
  if (!user.contains("type") || !user["type"].is_string()) {
    raise(ErrorKind::ParseError, where + ".type: missing or not a string");
  }
  const std::string type = user["type"];
  json out;
  if (type == "polynomial") {
    out = {{"type", "polynomial"}, {"coeffs", json::array()}};
  } else if (type == "coulomb") {
    out = {{"type", "coulomb"}, {"e2", 1.0}, {"eps_reg", 1e-6}};
  } else {
    raise(ErrorKind::ParseError, where + ".type: expected 'polynomial' or 'coulomb'");
  }
  for (const auto& [key, value] : user.items()) {
    if (!out.contains(key)) raise(ErrorKind::UnknownKey, where + "." + key);
    if (!compatible(out[key], value)) {
      raise(ErrorKind::ParseError, where + "." + key + ": expected " + type_name(out[key]));
    }
    out[key] = value;
  }
  if (type == "polynomial") {
    for (const auto& c : out["coeffs"]) {
      if (!c.is_number()) raise(ErrorKind::ParseError, where + ".coeffs: entries must be numbers");
    }
  }
  return out;
}

void overlay(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) raise(ErrorKind::ParseError, (where.empty() ? "config" : where) + ": expected object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) raise(ErrorKind::UnknownKey, path);
    json& slot = base[key];
    if (key == "potential") {
      slot = resolve_potential(value, path);
    } else if (slot.is_object()) {
      overlay(slot, value, path);
    } else {
      if (!compatible(slot, value)) {
        raise(ErrorKind::ParseError, path + ": expected " + type_name(slot) + ", got " + type_name(value));
      }
      if (slot.is_number_integer() && !value.is_number_integer()) {
        raise(ErrorKind::ParseError, path + ": expected an integer");
      }
      slot = value;
    }
  }
}

}  // namespace

json resolve_config(const std::string& subcommand, const json& user) {
  json base = default_config(subcommand);
  if (base.contains("potential")) base["potential"] = resolve_potential(base["potential"], "potential");
  if (!user.is_null()) overlay(base, user, "");
  return base;
}

json parse_config(const fs::path& path, const std::string& subcommand) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::ParseError, "cannot read config " + path.string());
  json user;
  try {
    user = json::parse(in);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return resolve_config(subcommand, user);
}

json potential_from_shorthand(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      raise(ErrorKind::ParseError, "bad number '" + s + "' in potential '" + text + "'");
    }
  };
  if (head == "free") return {{"type", "polynomial"}, {"coeffs", json::array()}};
  if (head == "quartic") return quartic_potential(number(arg));
  if (head == "cubic") return {{"type", "polynomial"}, {"coeffs", {0.0, 0.0, 0.0, number(arg)}}};
  if (head == "harmonic") {
    const double w = number(arg);
    return {{"type", "polynomial"}, {"coeffs", {0.0, 0.0, 0.5 * w * w}}};
  }
  if (head == "poly") {
    json coeffs = json::array();
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) coeffs.push_back(number(item));
    return {{"type", "polynomial"}, {"coeffs", coeffs}};
  }
  if (head == "coulomb") return {{"type", "coulomb"}, {"e2", number(arg)}, {"eps_reg", 1e-6}};
  raise(ErrorKind::ParseError, "unknown potential shorthand '" + text + "'");
}

PolynomialPotential polynomial_from_json(const json& potential) {
  if (potential.at("type") != "polynomial") {
    raise(ErrorKind::InvalidArgument, "this scenario needs a polynomial potential");
  }
  return PolynomialPotential(potential.at("coeffs").get<std::vector<double>>());
}

cplx parse_complex(const std::string& text) {
  const auto comma = text.find(',');
  try {
    if (comma == std::string::npos) return {std::stod(text), 0.0};
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (const std::exception&) {
    raise(ErrorKind::ParseError, "bad complex number '" + text + "' (expected re,im)");
  }
}

MatrixXcd parse_jc_initial_state(const std::string& state, int n_max) {
  Eigen::Matrix2cd atom = Eigen::Matrix2cd::Zero();
  auto set_atom = [&](char which) {
    atom.setZero();
    if (which == 'g') atom(kGround, kGround) = 1.0;
    else if (which == 'e') atom(kExcited, kExcited) = 1.0;
    else if (which == 'x') atom.setConstant(0.5);
    else raise(ErrorKind::ParseError, "bad atom state in '" + state + "' (use g, e or x)");
  };
  std::string field_text;
  if (state.rfind("coherent:", 0) == 0) {
    set_atom('e');
    field_text = state;
  } else if (state.size() > 2 && state[1] == ':') {
    set_atom(state[0]);
    field_text = state.substr(2);
  } else if (state.size() >= 2) {
    set_atom(state[0]);
    field_text = state.substr(1);
  } else {
    raise(ErrorKind::ParseError, "bad JC initial state '" + state + "'");
  }
  MatrixXcd field;
  if (field_text.rfind("coherent:", 0) == 0) {
    field = coherent_density(parse_complex(field_text.substr(9)), n_max);
  } else {
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(field_text, &used);
      if (used != field_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      raise(ErrorKind::ParseError, "bad Fock number in JC initial state '" + state + "'");
    }
    field = fock_density(n, n_max);
  }
  return jc_product_state(atom, field);
}

int exit_code_for(const Error& error) {
  if (is_numerical_guard(error.kind())) return kExitNumericalGuard;
  switch (error.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::UnknownKey:
    case ErrorKind::InvalidArgument:
      return kExitUsage;
    default:
      return kExitValidation;
  }
}

// ---------------------------------------------------------------------------
// Scenario execution

namespace {

using Clock = std::chrono::steady_clock;

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Collects outputs, checks and timings; writes the manifest.
class Run {
 public:
  Run(std::string scenario, json config, fs::path out_dir)
      : scenario_(std::move(scenario)), config_(std::move(config)), out_dir_(std::move(out_dir)),
        start_(Clock::now()) {
    fs::create_directories(out_dir_);
  }

  fs::path file(const std::string& suffix) {
    const fs::path p = out_dir_ / (config_.at("output").get<std::string>() + suffix);
    outputs_.push_back(p.filename().string());
    return p;
  }

  /// Passes when value ≤ tolerance.
  bool check(const std::string& name, double value, double tolerance) {
    const bool ok = std::isfinite(value) && value <= tolerance;
    checks_.push_back({name, value, tolerance, ok});
    return ok;
  }
  void warn(const std::string& message) { warnings_.push_back(message); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void note(const std::string& key, json value) { extra_[key] = std::move(value); }
  void time(const std::string& phase, double ms) { timings_[phase] = ms; }

  bool all_passed() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
  }
  const std::vector<Check>& checks() const { return checks_; }

  void write_manifest() {
    const fs::path path = out_dir_ / (config_.at("output").get<std::string>() + ".manifest.json");
    json checks = json::array();
    for (const auto& c : checks_) {
      checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    }
    timings_["total"] =
        std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    json manifest = {{"scenario", scenario_},
                     {"tool", kToolName},
                     {"version", kToolVersion},
                     {"config", config_},
                     {"seeds", seeds_},
                     {"outputs", outputs_},
                     {"checks", checks},
                     {"warnings", warnings_},
                     {"timings_ms", timings_},
                     {"results", extra_}};
    std::ofstream(path) << manifest.dump(2) << '\n';
  }

 private:
  std::string scenario_;
  json config_;
  fs::path out_dir_;
  Clock::time_point start_;
  std::vector<std::string> outputs_;
  std::vector<Check> checks_;
  std::vector<std::string> warnings_;
  json seeds_ = json::object();
  json extra_ = json::object();
  json timings_ = json::object();
};

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

SuperGrid grid_from(const json& g) {
  SuperGrid grid;
  grid.min = g.at("min").get<double>();
  grid.max = g.at("max").get<double>();
  grid.n = g.at("n").get<int>();
  grid.validate();
  return grid;
}

void run_superop(Run& run, const json& cfg) {
  const SuperGrid grid = grid_from(cfg["grid"]);
  const json& pot = cfg["potential"];
  if (pot["type"] == "coulomb") {
    const CoulombPotential cp(pot["e2"].get<double>(), pot["eps_reg"].get<double>());
    CsvWriter csv(run.file(".csv"), {"Q_x[length]", "q_x[length]", "E[energy]"});
    long long singular = 0;
    for (int a = 0; a < grid.n; ++a) {
      for (int b = 0; b < grid.n; ++b) {
        const Vec3 Q(grid.coord(a), 0.0, 0.0), q(grid.coord(b), 0.0, 0.0);
        try {
          csv.row(std::vector<double>{Q.x(), q.x(), coulomb_e_superoperator(cp, Q, q)});
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::SingularRegion) throw;
          ++singular;
        }
      }
    }
    run.note("singular_points_skipped", singular);
    return;
  }

  const PolynomialPotential v = polynomial_from_json(pot);
  const Dynamics kind = parse_dynamics(cfg["kind"]);
  const double mass = cfg["mass"], hbar = cfg["hbar"];
  CsvWriter csv(run.file(".csv"), {"Q[length]", "q[length]", "V_QM[energy]", "V_CL[energy]", "E[energy]"});
  double max_e = 0.0, antisym = 0.0;
  for (int a = 0; a < grid.n; ++a) {
    for (int b = 0; b < grid.n; ++b) {
      const double Q = grid.coord(a), q = grid.coord(b);
      const double e = e_superoperator(v, Q, q);
      max_e = std::max(max_e, std::abs(e));
      antisym = std::max(antisym, std::abs(e + e_superoperator(v, q, Q)));
      csv.row(std::vector<double>{Q, q, super_potential(v, Dynamics::QM, Q, q),
                                  super_potential(v, Dynamics::CL, Q, q), e});
    }
  }
  run.note("e_vanishes_identically", e_vanishes_identically(v));
  run.note("max_abs_e", max_e);
  run.check("e_antisymmetry", antisym, 1e-12 * std::max(1.0, max_e));
  if (e_vanishes_identically(v)) run.check("e_vanishes_on_grid", max_e, 1e-12);

  const GridLiouvillian l(v, grid, kind, mass, hbar);
  if (cfg["export_dense"].get<bool>()) write_dense_csv(run.file(".liouvillian.csv"), l.dense());
  if (cfg["spectrum"].get<bool>()) {
    const auto t0 = Clock::now();
    const auto ev = spectrum(l);
    run.check("spectral_symmetry", spectral_negation_mismatch(ev), 1e-8);
    run.time("spectrum", elapsed_ms(t0));
  }
}

void run_evolve(Run& run, const json& cfg) {
  const PolynomialPotential v = polynomial_from_json(cfg["potential"]);
  const Dynamics kind = parse_dynamics(cfg["kind"]);
  const SuperGrid grid = grid_from(cfg["grid"]);
  EvolutionConfig ec;
  ec.t0 = 0.0;
  ec.t1 = cfg["t"];
  ec.n_steps = cfg["n_steps"];
  ec.method = parse_method(cfg["method"]);
  ec.mass = cfg["mass"];
  ec.hbar = cfg["hbar"];
  ec.validate();
  const int every = std::max(1, cfg["output_every"].get<int>());
  const json& init = cfg["initial"];
  const SuperDensity rho0 =
      gaussian_super_density(grid, init["x0"], init["p0"], init["sigma_x"], init["sigma_p"], ec.hbar);

  CsvWriter csv(run.file(".csv"), {"t[time]", "trace[1]", "x_mean[length]", "p_mean[momentum]",
                                   "x2_mean[length^2]", "purity[1]"});
  const double tr0 = trace(rho0);
  double worst_trace = 0.0, worst_herm = 0.0;
  auto emit = [&](double t, const SuperDensity& rho) {
    const double tr = trace(rho);
    worst_trace = std::max(worst_trace, std::abs(tr - tr0));
    worst_herm = std::max(worst_herm, hermiticity_deviation(rho));
    csv.row(std::vector<double>{t, tr, expect_x(rho, 1e-6), expect_p(rho, ec.hbar, 1e-6),
                                expect_x2(rho, 1e-6), purity(rho)});
  };
  emit(0.0, rho0);
  int step = 0;
  const auto t0 = Clock::now();
  const SuperDensity final_state = evolve_grid(v, grid, kind, rho0, ec, [&](double t, const SuperDensity& rho) {
    if (++step % every == 0 || step == ec.n_steps) emit(t, rho);
  });
  run.time("evolve", elapsed_ms(t0));
  run.check("trace_drift", worst_trace, 1e-8);
  run.check("hermiticity", worst_herm, 1e-8);
  const double boundary = boundary_fraction(final_state);
  run.note("boundary_fraction", boundary);
  run.note("boundary_conditions", "periodic");
  if (boundary > 1e-10) {
    run.warn("density at the periodic boundary is " + format_number(boundary) +
             " of its peak; enlarge the grid");
  }
}

void run_propagator(Run& run, const json& cfg) {
  const double T = cfg["T"], lambda = cfg["lambda"], mass = cfg["mass"], hbar = cfg["hbar"];
  const double tol = cfg["tolerance"];
  std::vector<std::array<double, 4>> points;
  for (const auto& p : cfg["points"]) {
    const auto v = p.get<std::vector<double>>();
    if (v.size() != 4) raise(ErrorKind::ParseError, "points entries need [Q_f, q_f, Q_i, q_i]");
    points.push_back({v[0], v[1], v[2], v[3]});
  }
  if (points.empty()) {
    const std::uint64_t seed = cfg["random"]["seed"].get<std::uint64_t>();
    const double range = cfg["random"]["range"];
    run.seed("random_points", seed);
    auto rng = make_stream(seed, 0);
    std::uniform_real_distribution<double> u(-range, range);
    for (int i = 0; i < cfg["random"]["count"].get<int>(); ++i) {
      const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
      points.push_back({a, b, c, d});
    }
  }

  CsvWriter csv(run.file(".csv"),
                {"Q_f", "q_f", "Q_i", "q_i", "T", "G0_re", "G0_im", "gamma_qm_re", "gamma_qm_im",
                 "gamma_cl_re", "gamma_cl_im", "G_cl_re", "G_cl_im", "G_qm_re", "G_qm_im",
                 "numeric_cl_re", "numeric_cl_im", "numeric_qm_re", "numeric_qm_im", "rel_error"});
  double worst = 0.0;
  for (const auto& p : points) {
    PropagatorPoint pt{p[0], p[1], p[2], p[3], T, mass, hbar};
    const cplx g0 = free_superpropagator(pt);
    const cplx gq = gamma_qm(pt), gc = gamma_cl(pt);
    const cplx g_cl = first_order_superpropagator(pt, lambda, Dynamics::CL);
    const cplx g_qm = first_order_superpropagator(pt, lambda, Dynamics::QM);
    const cplx n_cl = g0 + dyson_first_order_numeric(pt, lambda, Dynamics::CL);
    const cplx n_qm = g0 + dyson_first_order_numeric(pt, lambda, Dynamics::QM);
    // Compare the corrections themselves; 𝒢₀ is common to both sides.
    auto rel = [&](cplx closed, cplx numeric) {
      const double scale = std::max(std::abs(numeric - g0), 1e-300);
      return std::abs(closed - numeric) / scale;
    };
    const double err = lambda == 0.0 ? 0.0 : std::max(rel(g_cl, n_cl), rel(g_qm, n_qm));
    worst = std::max(worst, err);
    csv.row(std::vector<double>{p[0], p[1], p[2], p[3], T, g0.real(), g0.imag(), gq.real(), gq.imag(),
                                gc.real(), gc.imag(), g_cl.real(), g_cl.imag(), g_qm.real(),
                                g_qm.imag(), n_cl.real(), n_cl.imag(), n_qm.real(), n_qm.imag(), err});
  }
  run.check("closed_form_vs_numeric_dyson", worst, tol);
}

void run_jc(Run& run, const json& cfg, int threads, std::ostream& out) {
  JCParams p;
  p.omega_e = cfg["omega_e"];
  p.omega = cfg["omega"];
  p.d_eg = cfg["d"];
  p.n_max = cfg["n_max"];
  const auto eps = cfg["eps"].get<std::vector<double>>();
  const auto eps2 = cfg["eps_eegg"].get<std::vector<double>>();
  if (eps.size() != 2 || eps2.size() != 2) raise(ErrorKind::ParseError, "eps values need [re, im]");
  p.eps_egeg = {eps[0], eps[1]};
  p.eps_eegg = {eps2[0], eps2[1]};

  const json& cc = cfg["coulomb"];
  if (cc["enabled"].get<bool>()) {
    const HydrogenState e = parse_hydrogen_state(cc["excited"]);
    const HydrogenState g = parse_hydrogen_state(cc["ground"]);
    McOptions mc;
    mc.samples = cc["samples"].get<long long>();
    mc.seed = cc["seed"].get<std::uint64_t>();
    mc.threads = threads;
    run.seed("coulomb_mc", mc.seed);
    const auto t0 = Clock::now();
    const McEstimate est = coulomb_superop_element(e, g, e, g, cc["e2"], mc);
    run.time("coulomb_mc", elapsed_ms(t0));
    p.eps_egeg = est.value;
    run.note("eps_egeg_estimate", {{"re", est.value.real()}, {"im", est.value.imag()},
                                   {"std_error", est.std_error}, {"samples", est.samples},
                                   {"excluded", est.excluded}});
    out << "coulomb: eps_eg,eg = " << est.value << " +/- " << est.std_error << '\n';
  }

  const MatrixXcd rho0 = parse_jc_initial_state(cfg["init"], p.n_max);
  const int n_t = std::max(2, cfg["n_t"].get<int>());
  const double t_max = cfg["t_max"];
  std::vector<double> times(n_t);
  for (int k = 0; k < n_t; ++k) times[k] = t_max * k / (n_t - 1);

  const auto t0 = Clock::now();
  const auto states = jc_evolve_exact_series(p, rho0, times, true);
  run.time("evolve", elapsed_ms(t0));
  CsvWriter csv(run.file(".csv"), {"t[time]", "P_e[1]", "abs_rho_eg00[1]", "trace[1]", "purity[1]"});
  double worst_trace = 0.0, worst_herm = 0.0, worst_rabi = 0.0;
  const bool rabi = p.eps_egeg == 0.0 && p.eps_eegg == 0.0 && p.omega_e == p.omega &&
                    cfg["init"].get<std::string>() == "e0";
  for (std::size_t k = 0; k < times.size(); ++k) {
    const MatrixXcd& r = states[k];
    const double tr = r.trace().real();
    worst_trace = std::max(worst_trace, std::abs(tr - 1.0));
    worst_herm = std::max(worst_herm, hermiticity_deviation(r));
    const double pe = excited_population(r, p.n_max);
    if (rabi) {
      const double c = std::cos(p.d_eg * times[k]);
      worst_rabi = std::max(worst_rabi, std::abs(pe - c * c));
    }
    csv.row(std::vector<double>{times[k], pe, std::abs(coherence_eg00(r, p.n_max)), tr,
                                (r * r).trace().real()});
  }
  if (p.eps_eegg == 0.0) run.check("trace_drift", worst_trace, 1e-8);
  run.check("hermiticity", worst_herm, 1e-8);
  if (rabi) run.check("vacuum_rabi_cos2", worst_rabi, 1e-6);
}

void run_bipartite(Run& run, const json& cfg) {
  BipartiteBasis basis;
  basis.n_levels = cfg["n_levels"];
  basis.omega = cfg["omega"];
  basis.mass = cfg["mass"];
  basis.hbar = cfg["hbar"];
  basis.validate();
  const double lambda = cfg["lambda"];
  const MatrixXcd rho0 = coherent_product_state(basis, cfg["alpha1"].get<double>(),
                                                cfg["alpha2"].get<double>());
  const int n_t = std::max(2, cfg["n_t"].get<int>());
  const double t_max = cfg["t_max"];
  std::vector<double> times(n_t);
  for (int k = 0; k < n_t; ++k) times[k] = t_max * k / (n_t - 1);

  // Generator audit: CL - QM against the classified monomials of the classical coupling.
  const MatrixXcd l_cl = build_bipartite_liouvillian(basis, lambda, Dynamics::CL);
  const MatrixXcd l_qm = build_bipartite_liouvillian(basis, lambda, Dynamics::QM);
  MatrixXcd nonpure = MatrixXcd::Zero(l_cl.rows(), l_cl.cols());
  json classes = json::object();
  for (const auto& term : classify_bipartite_terms(lambda)) {
    classes[to_string(term.cls)] = classes.value(to_string(term.cls), 0) + 1;
    if (term.cls == MonomialClass::IntraSubsystemMixed || term.cls == MonomialClass::InterSpaceCross) {
      nonpure += monomial_action(basis, term);
    }
  }
  const MatrixXcd qm_action = superpotential_action(basis, bipartite_qm_polynomial(lambda));
  const MatrixXcd diff = l_cl - l_qm;
  run.note("monomial_classes", classes);
  run.note("audit_literal_residual", (diff - nonpure).cwiseAbs().maxCoeff());
  run.note("audit_half_qm_norm", (0.5 * qm_action).cwiseAbs().maxCoeff());
  run.check("audit_cl_minus_qm", (diff - (nonpure - 0.5 * qm_action)).cwiseAbs().maxCoeff(), 1e-10);

  const auto t0 = Clock::now();
  const auto rows = compare_cl_qm_entanglement(basis, lambda, rho0, times, cfg["leak_limit"]);
  run.time("evolve", elapsed_ms(t0));
  CsvWriter csv(run.file(".csv"), {"t[time]", "purity_cl[1]", "purity_qm[1]", "min_eig_cl[1]",
                                   "min_eig_qm[1]", "trace_drift[1]"});
  double drift = 0.0, herm = 0.0, qm_neg = 0.0;
  for (const auto& r : rows) {
    csv.row(std::vector<double>{r.t, r.purity_cl, r.purity_qm, r.min_eig_cl, r.min_eig_qm, r.trace_drift});
    drift = std::max(drift, r.trace_drift);
    herm = std::max(herm, r.hermiticity);
    qm_neg = std::max(qm_neg, -r.min_eig_qm);
  }
  run.check("trace_drift", drift, 1e-8);
  run.check("hermiticity", herm, 1e-8);
  run.check("qm_positivity", qm_neg, 1e-8);
}

// ---------------------------------------------------------------------------
// Built-in invariant suite

void run_validate(Run& run, const json& cfg, std::ostream& out) {
  const std::uint64_t seed = cfg["seed"].get<std::uint64_t>();
  run.seed("suite", seed);
  auto rng = make_stream(seed, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  {  // Degree ≤ 2 potentials have ℰ ≡ 0; quartic ones do not.
    double worst = 0.0, weakest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const PolynomialPotential quad({u(rng), u(rng), u(rng)});
      worst = std::max(worst, max_abs_e_on_grid(quad, -2.0, 2.0, 16) / 4.0);
      const PolynomialPotential quart({u(rng), u(rng), u(rng), u(rng), 0.5 + std::abs(u(rng))});
      weakest = std::min(weakest, max_abs_e_on_grid(quart, -2.0, 2.0, 16));
    }
    run.check("e_vanishes_for_quadratic", worst, 1e-12);
    run.check("e_nonzero_for_quartic", weakest > 0.0 ? 0.0 : 1.0, 0.0);
  }
  {  // Quartic superpotential identity.
    double worst = 0.0;
    const double lambda = 0.7;
    const auto v = PolynomialPotential::monomial(4, lambda);
    for (int i = 0; i < 200; ++i) {
      const double Q = 3 * u(rng), q = 3 * u(rng);
      const double ref = 0.5 * lambda * (Q * Q * Q * Q - q * q * q * q + 2 * (Q * Q * Q * q - Q * q * q * q));
      worst = std::max(worst, std::abs(super_potential(v, Dynamics::CL, Q, q) - ref) /
                                  std::max(1.0, std::abs(ref)));
    }
    run.check("quartic_identity", worst, 1e-12);
  }
  {  // Commutator identity and spectral symmetry of a basis Liouvillian.
    MatrixXcd h = MatrixXcd::Zero(5, 5), rho = MatrixXcd::Zero(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        h(i, j) = {u(rng), u(rng)};
        rho(i, j) = {u(rng), u(rng)};
      }
    h = (0.5 * (h + h.adjoint())).eval();
    const BasisLiouvillian l(h);
    const MatrixXcd direct = h * rho - rho * h;
    run.check("commutator_identity", (l.apply(rho) - direct).cwiseAbs().maxCoeff(), 1e-12);
    run.check("commutator_identity_dense",
              (unvectorize(l.dense() * vectorize(rho), 5) - direct).cwiseAbs().maxCoeff(), 1e-12);
    run.check("qm_spectral_symmetry", spectral_negation_mismatch(spectrum(l)), 1e-8);
  }
  {  // CL grid spectral symmetry and CL = QM for harmonic potentials.
    const SuperGrid grid{-3.0, 3.0, 8};
    const GridLiouvillian cl(PolynomialPotential::monomial(4, 0.1), grid, Dynamics::CL);
    run.check("cl_spectral_symmetry", spectral_negation_mismatch(spectrum(cl)), 1e-8);
    const PolynomialPotential harm({0.0, 0.0, 0.5});
    const GridLiouvillian a(harm, grid, Dynamics::CL), b(harm, grid, Dynamics::QM);
    run.check("harmonic_cl_equals_qm", (a.dense() - b.dense()).cwiseAbs().maxCoeff(), 0.0);
  }
  {  // Free transport and conservation on the grid.
    const SuperGrid grid{-10.0, 10.0, 64};
    const SuperDensity rho0 = gaussian_super_density(grid, -1.0, 1.0, 0.6, 1.0);
    EvolutionConfig ec;
    ec.t1 = 1.0;
    ec.n_steps = 1;
    const SuperDensity cl = evolve_trotter(PolynomialPotential(), grid, Dynamics::CL, rho0, ec);
    run.check("free_transport_x", std::abs(expect_x(cl) - 0.0), 1e-6);
    run.check("free_transport_p", std::abs(expect_p(cl) - 1.0), 1e-6);
    ec.n_steps = 200;
    ec.t1 = 2.0;
    const SuperDensity q = evolve_trotter(PolynomialPotential::monomial(4, 0.1), grid, Dynamics::CL, rho0, ec);
    run.check("trotter_trace", std::abs(trace(q) - trace(rho0)), 1e-8);
    run.check("trotter_hermiticity", hermiticity_deviation(q), 1e-8);
  }
  {  // Closed-form first order against the numeric Dyson integral.
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const PropagatorPoint pt{u(rng), u(rng), u(rng), u(rng), 0.7, 1.0, 1.0};
      const cplx g0 = free_superpropagator(pt);
      for (Dynamics kind : {Dynamics::QM, Dynamics::CL}) {
        const cplx closed = first_order_superpropagator(pt, 0.2, kind) - g0;
        const cplx numeric = dyson_first_order_numeric(pt, 0.2, kind);
        worst = std::max(worst, std::abs(closed - numeric) / std::abs(numeric));
      }
    }
    run.check("gamma_vs_numeric_dyson", worst, 1e-3);
  }
  {  // Vacuum Rabi oscillation and first-order consistency.
    JCParams p;
    p.d_eg = 0.05;
    const MatrixXcd rho0 = parse_jc_initial_state("e0", p.n_max);
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(kPi / p.d_eg * k / 40.0);
    const auto states = jc_evolve_exact_series(p, rho0, times);
    double worst = 0.0, drift = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double c = std::cos(p.d_eg * times[k]);
      worst = std::max(worst, std::abs(excited_population(states[k], p.n_max) - c * c));
      drift = std::max(drift, std::abs(states[k].trace().real() - 1.0));
    }
    run.check("vacuum_rabi", worst, 1e-6);
    run.check("jc_trace", drift, 1e-8);
  }
  {  // Bipartite generator audit.
    BipartiteBasis basis;
    basis.n_levels = 3;
    const double lambda = 0.3;
    const MatrixXcd diff = build_bipartite_liouvillian(basis, lambda, Dynamics::CL) -
                           build_bipartite_liouvillian(basis, lambda, Dynamics::QM);
    MatrixXcd nonpure = MatrixXcd::Zero(diff.rows(), diff.cols());
    for (const auto& term : classify_bipartite_terms(lambda)) {
      if (term.cls == MonomialClass::IntraSubsystemMixed || term.cls == MonomialClass::InterSpaceCross) {
        nonpure += monomial_action(basis, term);
      }
    }
    const MatrixXcd half_qm = 0.5 * superpotential_action(basis, bipartite_qm_polynomial(lambda));
    run.check("bipartite_audit", (diff - nonpure + half_qm).cwiseAbs().maxCoeff(), 1e-10);
  }

  CsvWriter csv(run.file(".csv"), {"check", "value", "tolerance", "pass"});
  int passed = 0;
  for (const auto& c : run.checks()) {
    csv.row(std::vector<std::string>{c.name, format_number(c.value), format_number(c.tolerance),
                                     c.pass ? "true" : "false"});
    out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " = " << c.value << " (tol " << c.tolerance
        << ")\n";
    passed += c.pass;
  }
  out << "validate: " << passed << "/" << run.checks().size() << " checks passed\n";
}

// ---------------------------------------------------------------------------
// Flag overrides

template <typename T>
void set_if(json& cfg, const std::string& key, const std::optional<T>& value) {
  if (value) cfg[key] = *value;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"superdyn: classical and quantum superoperator dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out_dir_flag;
  app.add_option("--out-dir", out_dir_flag, "Output directory (default $SUPERDYN_OUT_DIR or .)");
  std::optional<int> threads_flag;
  app.add_option("--threads", threads_flag, "Worker threads (default $SUPERDYN_THREADS or 1)");

  struct Common {
    std::string config_path;
    bool dump = false;
    std::optional<std::string> output;
  };
  std::map<std::string, Common> common;
  std::map<std::string, CLI::App*> apps;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sc = app.add_subcommand(name, help);
    Common& c = common[name];
    sc->add_option("--config", c.config_path, "JSON config file");
    sc->add_flag("--dump-config", c.dump, "Print the resolved config and exit");
    sc->add_option("--output", c.output, "Output base name");
    apps[name] = sc;
    return sc;
  };

  // superop
  std::optional<std::string> so_potential, so_kind;
  std::optional<double> so_min, so_max;
  std::optional<int> so_n;
  std::optional<bool> so_dense, so_spectrum;
  {
    CLI::App* sc = add("superop", "Tabulate superpotentials and the superoperator E(Q,q)");
    sc->add_option("--potential", so_potential, "Potential shorthand, e.g. quartic:0.1");
    sc->add_option("--kind", so_kind, "qm or cl");
    sc->add_option("--grid-min", so_min);
    sc->add_option("--grid-max", so_max);
    sc->add_option("--n", so_n, "Grid points per axis");
    sc->add_option("--export-dense", so_dense, "Write the dense Liouvillian (true/false)");
    sc->add_option("--spectrum", so_spectrum, "Check spectral symmetry (true/false)");
  }
  // evolve
  std::optional<std::string> ev_potential, ev_kind, ev_method;
  std::optional<double> ev_t, ev_min, ev_max, ev_x0, ev_p0, ev_sx, ev_sp, ev_mass, ev_hbar;
  std::optional<int> ev_steps, ev_n, ev_every;
  {
    CLI::App* sc = add("evolve", "Evolve a Gaussian density on the (Q,q) grid");
    sc->add_option("--potential", ev_potential, "Potential shorthand, e.g. quartic:0.1");
    sc->add_option("--kind", ev_kind, "qm or cl");
    sc->add_option("--t", ev_t, "Final time");
    sc->add_option("--steps", ev_steps, "Number of time steps");
    sc->add_option("--method", ev_method, "trotter-strang, trotter-lie, rk4 or matrix-exp");
    sc->add_option("--n", ev_n, "Grid points per axis");
    sc->add_option("--grid-min", ev_min);
    sc->add_option("--grid-max", ev_max);
    sc->add_option("--x0", ev_x0);
    sc->add_option("--p0", ev_p0);
    sc->add_option("--sigma-x", ev_sx);
    sc->add_option("--sigma-p", ev_sp);
    sc->add_option("--mass", ev_mass);
    sc->add_option("--hbar", ev_hbar);
    sc->add_option("--output-every", ev_every, "Emit a CSV row every k steps");
  }
  // propagator
  std::optional<double> pr_T, pr_lambda, pr_range;
  std::optional<int> pr_count;
  std::optional<std::uint64_t> pr_seed;
  {
    CLI::App* sc = add("propagator", "Free and first-order superpropagators with a numeric check");
    sc->add_option("--T", pr_T, "Propagation time");
    sc->add_option("--lambda", pr_lambda, "Quartic coupling");
    sc->add_option("--count", pr_count, "Number of random endpoint tuples");
    sc->add_option("--seed", pr_seed);
    sc->add_option("--range", pr_range, "Endpoints drawn from [-range, range]");
  }
  // jc
  std::optional<double> jc_we, jc_w, jc_d, jc_tmax;
  std::optional<std::string> jc_eps, jc_eps2, jc_init;
  std::optional<int> jc_nmax, jc_nt;
  bool jc_coulomb = false;
  std::optional<long long> jc_samples;
  std::optional<std::uint64_t> jc_seed;
  {
    CLI::App* sc = add("jc", "Jaynes-Cummings evolution with the Coulomb superoperator");
    sc->add_option("--omega-e", jc_we);
    sc->add_option("--omega", jc_w);
    sc->add_option("--d", jc_d, "Dipole coupling d_eg");
    sc->add_option("--eps", jc_eps, "E_eg,eg as re,im");
    sc->add_option("--eps-eegg", jc_eps2, "E_ee,gg as re,im");
    sc->add_option("--n-max", jc_nmax, "Fock truncation");
    sc->add_option("--init", jc_init, "e0, g1, coherent:a, x:coherent:a, ...");
    sc->add_option("--t-max", jc_tmax);
    sc->add_option("--n-t", jc_nt, "Number of output times");
    sc->add_flag("--coulomb", jc_coulomb, "Estimate E_eg,eg by Monte Carlo");
    sc->add_option("--samples", jc_samples, "Monte Carlo samples");
    sc->add_option("--seed", jc_seed, "Monte Carlo seed");
  }
  // bipartite
  std::optional<int> bp_levels, bp_nt;
  std::optional<double> bp_lambda, bp_a1, bp_a2, bp_tmax, bp_leak;
  {
    CLI::App* sc = add("bipartite", "CL vs QM entanglement generation under quartic coupling");
    sc->add_option("--n-levels", bp_levels);
    sc->add_option("--lambda", bp_lambda);
    sc->add_option("--alpha1", bp_a1);
    sc->add_option("--alpha2", bp_a2);
    sc->add_option("--t-max", bp_tmax);
    sc->add_option("--n-t", bp_nt);
    sc->add_option("--leak-limit", bp_leak, "Abort when the top level exceeds this (0 = off)");
  }
  add("validate", "Run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const Common& c = common[name];
  try {
    json cfg = c.config_path.empty() ? resolve_config(name, json::object())
                                     : parse_config(c.config_path, name);
    if (c.output) cfg["output"] = *c.output;
    if (name == "superop") {
      if (so_potential) cfg["potential"] = potential_from_shorthand(*so_potential);
      set_if(cfg, "kind", so_kind);
      set_if(cfg["grid"], "min", so_min);
      set_if(cfg["grid"], "max", so_max);
      set_if(cfg["grid"], "n", so_n);
      set_if(cfg, "export_dense", so_dense);
      set_if(cfg, "spectrum", so_spectrum);
    } else if (name == "evolve") {
      if (ev_potential) cfg["potential"] = potential_from_shorthand(*ev_potential);
      set_if(cfg, "kind", ev_kind);
      set_if(cfg, "t", ev_t);
      set_if(cfg, "n_steps", ev_steps);
      set_if(cfg, "method", ev_method);
      set_if(cfg["grid"], "n", ev_n);
      set_if(cfg["grid"], "min", ev_min);
      set_if(cfg["grid"], "max", ev_max);
      set_if(cfg["initial"], "x0", ev_x0);
      set_if(cfg["initial"], "p0", ev_p0);
      set_if(cfg["initial"], "sigma_x", ev_sx);
      set_if(cfg["initial"], "sigma_p", ev_sp);
      set_if(cfg, "mass", ev_mass);
      set_if(cfg, "hbar", ev_hbar);
      set_if(cfg, "output_every", ev_every);
    } else if (name == "propagator") {
      set_if(cfg, "T", pr_T);
      set_if(cfg, "lambda", pr_lambda);
      set_if(cfg["random"], "count", pr_count);
      set_if(cfg["random"], "seed", pr_seed);
      set_if(cfg["random"], "range", pr_range);
    } else if (name == "jc") {
      set_if(cfg, "omega_e", jc_we);
      set_if(cfg, "omega", jc_w);
      set_if(cfg, "d", jc_d);
      if (jc_eps) {
        const cplx e = parse_complex(*jc_eps);
        cfg["eps"] = {e.real(), e.imag()};
      }
      if (jc_eps2) {
        const cplx e = parse_complex(*jc_eps2);
        cfg["eps_eegg"] = {e.real(), e.imag()};
      }
      set_if(cfg, "n_max", jc_nmax);
      set_if(cfg, "init", jc_init);
      set_if(cfg, "t_max", jc_tmax);
      set_if(cfg, "n_t", jc_nt);
      if (jc_coulomb) cfg["coulomb"]["enabled"] = true;
      set_if(cfg["coulomb"], "samples", jc_samples);
      set_if(cfg["coulomb"], "seed", jc_seed);
    } else if (name == "bipartite") {
      set_if(cfg, "n_levels", bp_levels);
      set_if(cfg, "lambda", bp_lambda);
      set_if(cfg, "alpha1", bp_a1);
      set_if(cfg, "alpha2", bp_a2);
      set_if(cfg, "t_max", bp_tmax);
      set_if(cfg, "n_t", bp_nt);
      set_if(cfg, "leak_limit", bp_leak);
    }
    // Flags may have introduced values of the wrong type; re-resolve to validate.
    cfg = resolve_config(name, cfg);

    if (c.dump) {
      out << cfg.dump(2) << '\n';
      return kExitOk;
    }

    fs::path out_dir = ".";
    if (const char* env = std::getenv("SUPERDYN_OUT_DIR"); env && *env) out_dir = env;
    if (!out_dir_flag.empty()) out_dir = out_dir_flag;
    int threads = 1;
    if (const char* env = std::getenv("SUPERDYN_THREADS"); env && *env) {
      try {
        threads = std::max(1, std::stoi(env));
      } catch (const std::exception&) {
        raise(ErrorKind::ParseError, "SUPERDYN_THREADS must be an integer");
      }
    }
    if (threads_flag) threads = std::max(1, *threads_flag);

    Run run_state(name, cfg, out_dir);
    try {
      if (name == "superop") run_superop(run_state, cfg);
      else if (name == "evolve") run_evolve(run_state, cfg);
      else if (name == "propagator") run_propagator(run_state, cfg);
      else if (name == "jc") run_jc(run_state, cfg, threads, out);
      else if (name == "bipartite") run_bipartite(run_state, cfg);
      else run_validate(run_state, cfg, out);
    } catch (const Error& e) {
      run_state.note("error", {{"kind", to_string(e.kind())}, {"message", e.what()}});
      run_state.write_manifest();
      throw;
    }
    run_state.write_manifest();
    for (const auto& check : run_state.checks()) {
      if (!check.pass) err << "check failed: " << check.name << " = " << check.value << '\n';
    }
    if (name != "validate") {
      out << name << ": wrote " << (out_dir / (cfg["output"].get<std::string>() + ".csv")).string()
          << '\n';
    }
    return run_state.all_passed() ? kExitOk : kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const json::exception& e) {
    err << "error: ParseError: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace superdyn::cli
