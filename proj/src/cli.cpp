#include "nipot/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "nipot/carleson.hpp"
#include "nipot/io.hpp"
#include "nipot/suites.hpp"

namespace nipot {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands = {
    "grid",          "weight-diag", "norms", "potentials", "capacity", "ball-capacity",
    "tents",         "equivalence", "continuity", "wolff-ratio"};

std::string usage() {
  std::string u = "usage: nipot <command> [--config FILE] [options]\ncommands:";
  for (const auto& c : kCommands) u += " " + c;
  u += "\nrun `nipot <command> --help` for options\n";
  return u;
}

/// Flag values as parsed; unset flags fall back to the config file, then defaults.
struct Flags {
  std::optional<int> n, L, measures, atoms, max_iterations;
  std::optional<double> p, s, q, alpha, lambda, eps, radius, t;
  std::optional<std::size_t> resolution;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, summary;
  std::string config;
};

void add_options(CLI::App& sub, Flags& f) {
  sub.add_option("--config", f.config, "JSON config file");
  sub.add_option("--n", f.n, "complex dimension (1 or 2)");
  sub.add_option("--p", f.p, "integrability exponent");
  sub.add_option("--s", f.s, "smoothness");
  sub.add_option("--q", f.q, "inner exponent");
  sub.add_option("--alpha", f.alpha, "aperture");
  sub.add_option("--lambda", f.lambda, "holomorphic potential exponent");
  sub.add_option("--eps", f.eps, "power weight exponent");
  sub.add_option("--resolution", f.resolution, "grid resolution");
  sub.add_option("--L", f.L, "dyadic depth");
  sub.add_option("--seed", f.seed, "random seed");
  sub.add_option("--measures", f.measures, "batch size");
  sub.add_option("--atoms", f.atoms, "atoms per measure");
  sub.add_option("--radius", f.radius, "ball radius");
  sub.add_option("--t", f.t, "tail exponent");
  sub.add_option("--max-iterations", f.max_iterations, "capacity solver iteration cap");
  sub.add_option("--out", f.out, "output path (stdout when absent)");
  sub.add_option("--summary", f.summary, "JSON summary path");
}

template <class T>
void merge(T& target, const std::optional<T>& flag, const json& cfg, const char* key) {
  if (flag) {
    target = *flag;
  } else if (cfg.contains(key)) {
    target = cfg.at(key).get<T>();
  }
}

RunConfig resolve(const std::string& command, const Flags& f) {
  json cfg = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    require(static_cast<bool>(in), "cannot open config file " + f.config);
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("malformed config: ") + e.what());
    }
    require(cfg.is_object(), "config must be a JSON object");
    static const std::vector<std::string> known = {
        "n", "p", "s", "q", "alpha", "lambda", "eps", "resolution", "L", "seed",
        "measures", "atoms", "radius", "t", "max_iterations", "out", "summary"};
    for (const auto& [k, v] : cfg.items())
      require(std::find(known.begin(), known.end(), k) != known.end(), "unknown config key " + k);
  }
  RunConfig c;
  c.command = command;
  try {
    merge(c.n, f.n, cfg, "n");
    merge(c.p, f.p, cfg, "p");
    merge(c.s, f.s, cfg, "s");
    merge(c.q, f.q, cfg, "q");
    merge(c.alpha, f.alpha, cfg, "alpha");
    merge(c.eps, f.eps, cfg, "eps");
    if (c.n == 2) c.resolution = 16;
    else if (command == "equivalence") c.resolution = 1024;
    merge(c.resolution, f.resolution, cfg, "resolution");
    merge(c.seed, f.seed, cfg, "seed");
    merge(c.measures, f.measures, cfg, "measures");
    merge(c.atoms, f.atoms, cfg, "atoms");
    merge(c.radius, f.radius, cfg, "radius");
    merge(c.t, f.t, cfg, "t");
    merge(c.max_iterations, f.max_iterations, cfg, "max_iterations");
    merge(c.out, f.out, cfg, "out");
    merge(c.summary, f.summary, cfg, "summary");
    if (f.lambda) c.lambda = f.lambda;
    else if (cfg.contains("lambda")) c.lambda = cfg.at("lambda").get<double>();
    if (f.L) c.L = f.L;
    else if (cfg.contains("L")) c.L = cfg.at("L").get<int>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  return c;
}

void validate_common(const RunConfig& c) {
  require(c.n == 1 || c.n == 2, "n must be 1 or 2");
  require(c.resolution >= 4, "resolution must be at least 4");
  require(c.n == 1 || c.resolution <= 128, "n = 2 resolution must be at most 128");
  require(c.measures >= 1, "measures must be positive");
  require(c.atoms >= 1, "atoms must be positive");
  require(!c.L || (*c.L >= 1 && *c.L <= 30), "L must lie in [1, 30]");
  require(c.eps == 0.0 || c.n == 2, "power weights need n = 2");
  require(c.eps > -1.0, "eps must exceed -1");
  require(c.alpha > 1.0, "alpha must exceed 1");
  require(c.radius > 0.0 && c.radius <= 2.0, "radius must lie in (0, 2]");
  require(c.max_iterations >= 1, "max_iterations must be positive");
}

PotentialParams params_of(const RunConfig& c) {
  PotentialParams pp;
  pp.p = c.p;
  pp.s = c.s;
  pp.q = c.q;
  pp.validate(c.n);
  return pp;
}

WeightField weight_of(const RunConfig& c, const QuadratureGrid& grid) {
  return c.eps == 0.0 ? WeightField::constant(grid, 1.0) : WeightField::power(grid, c.eps);
}

/// Middle t-layer on torus grids keeps the centre away from the singular circle.
std::size_t centre_node(const QuadratureGrid& grid) {
  if (grid.layout() != GridLayout::torus) return 0;
  const auto sh = grid.shape();
  return (sh[2] / 2) * sh[0] * sh[1];
}

SphereMeasure batch_measure(Rng& rng, const QuadratureGrid& grid) {
  return grid.dim() == 1 ? random_density_measure(rng, grid, 3)
                         : random_sparse_measure(rng, grid, 5, 0.6);
}

std::string num(double x) { return format_number(x); }

SolverConfig solver_of(const RunConfig& c) {
  SolverConfig sc;
  sc.max_iterations = c.max_iterations;
  return sc;
}

struct Output {
  std::ostream& out;
  std::ostream& err;
  const RunConfig& config;

  void emit(CsvTable& table) const {
    table.preamble({std::string("nipot ") + kVersion, "command " + config.command,
                    "config " + config.to_json()});
    if (config.out.empty()) {
      table.write(out);
      return;
    }
    std::ofstream f(config.out, std::ios::binary);
    require(static_cast<bool>(f), "cannot write " + config.out);
    table.write(f);
  }
  void emit_text(const std::string& text, const std::string& path) const {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    require(static_cast<bool>(f), "cannot write " + path);
    f << text;
  }
};

int cmd_grid(const RunConfig& c, const Output& o) {
  const auto grid = build_grid(c.n, c.resolution);
  o.emit_text(grid_json(grid, c.to_json()), c.out);
  return 0;
}

int cmd_weight_diag(const RunConfig& c, const Output& o) {
  require(c.p > 1.0, "p must exceed 1");
  require(c.radius <= 0.5, "tail radius must lie in (0, 1/2]");
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const auto family = BallFamily::default_for(grid, w);
  const auto ap = ap_constant(w, c.p, grid, family);
  BallFamily doubling_family;
  for (const auto& b : family.balls)
    if (8.0 * b.second <= 2.0) doubling_family.balls.push_back(b);
  const auto dbl = doubling_order(w, grid, doubling_family);
  const auto& zeta = grid.node(centre_node(grid));
  CsvTable t({"quantity", "value"});
  t.add_row({"ap_constant", num(ap.value)});
  t.add_row({"ap_balls_evaluated", std::to_string(ap.evaluated)});
  t.add_row({"ap_balls_skipped", std::to_string(ap.skipped)});
  t.add_row({"doubling_order", num(dbl.tau)});
  t.add_row({"doubling_fits", std::to_string(dbl.fits)});
  t.add_row({"tau_hat", num(tau_hat(w, grid))});
  t.add_row({"tail_upper", num(tail_bound_ratio(w, c.p, c.t, zeta, c.radius, grid, TailSide::upper))});
  t.add_row({"tail_lower", num(tail_bound_ratio(w, c.p, c.t, zeta, c.radius, grid, TailSide::lower))});
  o.emit(t);
  return 0;
}

int cmd_norms(const RunConfig& c, const Output& o) {
  require(c.p >= 1.0, "p must be at least 1");
  require(c.q >= 1.0, "q must be at least 1");
  require(c.s > 0.0, "s must be positive");
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const auto rg = RadialGrid::geometric();
  Rng rng(c.seed);
  CsvTable t({"function_id", "degree", "hs_norm", "tl_radial", "tl_area", "ratio_radial", "ratio_area"});
  for (int m = 0; m < c.measures; ++m) {
    const auto f = random_polynomial(rng, c.n, 8);
    const double hs = hs_norm(f, c.p, c.s, w, grid, rg);
    const double tr = tl_norm(f, c.p, c.q, c.s, w, grid, rg, {TlVariant::Kind::radial, c.alpha, {}});
    const double ta = tl_norm(f, c.p, c.q, c.s, w, grid, rg, {TlVariant::Kind::area, c.alpha, {}});
    t.add_row({std::to_string(m), std::to_string(f.max_degree()), num(hs), num(tr), num(ta),
               num(hs / tr), num(hs / ta)});
  }
  o.emit(t);
  return 0;
}

int cmd_potentials(const RunConfig& c, const Output& o) {
  auto pp = params_of(c);
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const double tau = tau_hat(w, grid);
  pp.lambda = c.lambda.value_or(default_lambda(tau, c.p, c.s));
  const HoloKind kind = c.p <= 2.0 ? HoloKind::U : HoloKind::V;
  const RieszOperator op(grid, c.s);
  Rng rng(c.seed);
  std::vector<SphereMeasure> batch;
  for (int m = 0; m < c.measures; ++m) batch.push_back(batch_measure(rng, grid));
  CsvTable t({"measure_id", "mass", "L", "energy", "potential_integral", "wolff_integral",
              "energy_over_wolff", "holo_norm_p", "holo_norm_p_over_energy"});
  for (int m = 0; m < c.measures; ++m) {
    const auto& nu = batch[static_cast<std::size_t>(m)];
    const int L = c.L.value_or(spread_level(nu, grid));
    const auto wr = wolff_ratio(nu, pp, w, op, L);
    const HoloPotential F(nu, pp, w, grid, L, kind, tau);
    const double hn = holo_potential_norm(F, pp, w, grid, RadialGrid::geometric(L + 6, 3, 5));
    t.add_row({std::to_string(m), num(nu.total()), std::to_string(L), num(wr.energy),
               num(potential_integral(nu, pp, w, op)), num(wr.wolff_integral), num(wr.ratio),
               num(hn), num(hn / wr.energy)});
  }
  o.emit(t);
  return 0;
}

int cmd_capacity(const RunConfig& c, const Output& o) {
  const auto pp = params_of(c);
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const RieszOperator op(grid, c.s);
  CapacityProblem prob{ball(grid, grid.node(centre_node(grid)), c.radius), pp, &w, &op, solver_of(c)};
  require(!prob.target.empty(), "target ball contains no grid node");
  const auto r = capacity(prob);
  CsvTable t({"radius", "nodes", "capacity", "method", "iterations", "gap", "min_constraint",
              "max_residual", "exact"});
  t.add_row({num(c.radius), std::to_string(prob.target.size()), num(r.value), r.method,
             std::to_string(r.iterations), num(r.gap), num(r.min_constraint), num(r.max_residual),
             r.exact ? "true" : "false"});
  o.emit(t);
  if (!r.exact) {
    o.err << "capacity solver did not converge\n";
    return 2;
  }
  return 0;
}

int cmd_ball_capacity(const RunConfig& c, const Output& o) {
  const auto pp = params_of(c);
  const int L = c.L.value_or(6);
  require(L >= 2, "L must be at least 2");
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const RieszOperator op(grid, c.s);
  const auto prof = ball_capacity_profile(grid.node(centre_node(grid)), pp, w, op,
                                          BallFamily::dyadic_radii(2, L), solver_of(c));
  CsvTable t({"radius", "nodes", "capacity", "comparison", "ratio"});
  for (const auto& pt : prof.points)
    t.add_row({num(pt.radius), std::to_string(pt.nodes), num(pt.capacity), num(pt.comparison),
               num(pt.ratio)});
  t.comment("slope " + (prof.slope ? num(*prof.slope) : std::string("none")));
  o.emit(t);
  return 0;
}

int cmd_tents(const RunConfig& c, const Output& o) {
  const auto pp = params_of(c);
  const int L = c.L.value_or(6);
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const RieszOperator op(grid, c.s);
  Rng rng(c.seed);
  const auto mu = random_ball_measure(rng, c.n, c.atoms, L);
  const auto& centre = grid.node(centre_node(grid));
  std::vector<IndexSet> sets;
  std::vector<double> radii;
  for (double r : BallFamily::dyadic_radii(1, L)) {
    auto b = ball(grid, centre, r);
    if (b.empty()) continue;
    sets.push_back(std::move(b));
    radii.push_back(r);
  }
  require(!sets.empty(), "no tent base contains a grid node");
  const auto rep = capacity_condition_ratio(mu, sets, pp, w, op, c.alpha, solver_of(c));
  CsvTable t({"set_id", "radius", "nodes", "tent_mass", "capacity", "ratio", "exact"});
  bool exact = true;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    exact = exact && row.exact;
    t.add_row({std::to_string(i), num(radii[i]), std::to_string(sets[i].size()), num(row.tent_mass),
               num(row.capacity), num(row.ratio), row.exact ? "true" : "false"});
  }
  t.comment("max_ratio " + num(rep.max_ratio));
  o.emit(t);
  if (!exact) {
    o.err << "capacity solver did not converge\n";
    return 2;
  }
  return 0;
}

int cmd_equivalence(const RunConfig& c, const Output& o) {
  ExperimentConfig ec;
  ec.seed = c.seed;
  ec.measures = c.measures;
  ec.atoms = c.atoms;
  ec.n = c.n;
  ec.p = c.p;
  ec.s = c.s;
  ec.eps = c.eps;
  ec.alpha = c.alpha;
  ec.resolution = c.resolution;
  ec.L = c.L.value_or(6);
  check_equivalence_regime(ec);
  const auto rep = equivalence_experiment(ec);
  CsvTable t({"seed", "measure_id", "p", "s", "eps", "resolution", "const_K", "const_C", "ratio",
              "tent_ratio"});
  for (const auto& r : rep.rows)
    t.add_row({std::to_string(r.seed), std::to_string(r.measure_id), num(r.p), num(r.s), num(r.eps),
               std::to_string(r.resolution), num(r.const_K), num(r.const_C), num(r.ratio),
               num(r.tent_ratio)});
  o.emit(t);
  const std::string summary = std::string("{\"version\":\"") + kVersion + "\",\"config\":" +
                              c.to_json() + ",\"max_ratio\":" + num(rep.max_ratio) +
                              ",\"median_ratio\":" + num(rep.median_ratio) + "}\n";
  std::string path = c.summary;
  if (path.empty() && !c.out.empty()) path = c.out + ".json";
  if (path.empty()) o.err << summary;
  else o.emit_text(summary, path);
  return 0;
}

int cmd_continuity(const RunConfig& c, const Output& o) {
  const auto pp = params_of(c);
  const auto coarse = build_grid(c.n, c.resolution);
  const auto fine = build_grid(c.n, 2 * c.resolution);
  const auto rep = continuity_criterion(coarse.node(centre_node(coarse)), pp, coarse, weight_of(c, coarse), fine,
                                        weight_of(c, fine));
  CsvTable t({"resolution_coarse", "resolution_fine", "coarse", "fine", "ratio"});
  t.add_row({std::to_string(c.resolution), std::to_string(2 * c.resolution), num(rep.coarse),
             num(rep.fine), num(rep.ratio)});
  t.comment("n_minus_sp " + num(c.n - c.s * c.p));
  o.emit(t);
  return 0;
}

int cmd_wolff_ratio(const RunConfig& c, const Output& o) {
  const auto pp = params_of(c);
  const auto grid = build_grid(c.n, c.resolution);
  const auto w = weight_of(c, grid);
  const RieszOperator op(grid, c.s);
  Rng rng(c.seed);
  CsvTable t({"measure_id", "E", "I_W", "ratio"});
  for (int m = 0; m < c.measures; ++m) {
    const auto nu = batch_measure(rng, grid);
    const auto wr = wolff_ratio(nu, pp, w, op, c.L.value_or(spread_level(nu, grid)));
    t.add_row({std::to_string(m), num(wr.energy), num(wr.wolff_integral), num(wr.ratio)});
  }
  o.emit(t);
  return 0;
}

int dispatch(const RunConfig& c, const Output& o) {
  static const std::map<std::string, int (*)(const RunConfig&, const Output&)> table = {
      {"grid", cmd_grid},           {"weight-diag", cmd_weight_diag},
      {"norms", cmd_norms},         {"potentials", cmd_potentials},
      {"capacity", cmd_capacity},   {"ball-capacity", cmd_ball_capacity},
      {"tents", cmd_tents},         {"equivalence", cmd_equivalence},
      {"continuity", cmd_continuity}, {"wolff-ratio", cmd_wolff_ratio}};
  return table.at(c.command)(c, o);
}

}  // namespace

const std::vector<std::string>& subcommands() { return kCommands; }

std::string RunConfig::to_json() const {
  json j = {{"n", n},         {"p", p},          {"s", s},           {"q", q},
            {"alpha", alpha}, {"eps", eps},      {"resolution", resolution},
            {"seed", seed},   {"measures", measures}, {"atoms", atoms},
            {"radius", radius}, {"t", t}, {"max_iterations", max_iterations}};
  j["lambda"] = lambda ? json(*lambda) : json(nullptr);
  j["L"] = L ? json(*L) : json(nullptr);
  return j.dump();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || std::find(kCommands.begin(), kCommands.end(), args[0]) == kCommands.end()) {
    if (!args.empty()) err << "unknown command: " << args[0] << "\n";
    err << usage();
    return 1;
  }
  CLI::App app{"nipot"};
  Flags flags;
  CLI::App* sub = app.add_subcommand(args[0], "");
  add_options(*sub, flags);
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << sub->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << usage();
    return 1;
  }
  try {
    RunConfig c = resolve(args[0], flags);
    validate_common(c);
    return dispatch(c, Output{out, err, c});
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return 1;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nipot
