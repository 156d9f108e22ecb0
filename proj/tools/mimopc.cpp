#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mimopc/evaluation.hpp"
#include "mimopc/io.hpp"
#include "selftest.hpp"

namespace {

using namespace mimopc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSelftest = 4;

const char* kFooter = R"(
Exit codes: 0 success, 2 configuration or usage error, 3 solver failure, 4 selftest failure.

Output: <out>/<experiment>/<tag>/ with config.resolved.json, results.csv and summary.json.
The tag defaults to a UTC timestamp.

results.csv columns
  simulate:     drop,cell,user,scheme,direction,sinr,se
                one row per user per drop per scheme and direction; se in bit/s/Hz
  scalability:  offset_db,nwmmf_sum_se,nwpf_sum_se,gm_sum_se,gm_other_cells_sum_se,
                nwmmf_min_se,gm_without_cell_sum_se,user_a_full_power_se
                user A is user 0 of cell 0; gm_other_cells_sum_se excludes its cell,
                gm_without_cell_sum_se re-solves GM with that cell switched off,
                user_a_full_power_se has user A at full power and everyone else silent
  power-sweep:  direction,budget_w,scheme,p5_sum_se,median_sum_se
                p5_sum_se is the 5th percentile of the per-drop sum SE

Schemes: gm (per-cell max-min, geometric mean), nwmmf, nwpf, approx (closed-form per-cell).
)";

// Values from the command line that override the configuration file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> reuse;
  std::optional<std::int64_t> cells;
  std::optional<std::int64_t> users;
  std::optional<std::int64_t> antennas;
  std::string fading = "correlated";
  std::string direction = "both";
  std::string out = "results";
  std::string tag;
  unsigned threads = 0;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c, bool with_threads = true) {
  app->add_option("--config", c.config, "JSON configuration file (unknown keys are rejected)");
  app->add_option("--seed", c.seed, "Experiment seed");
  app->add_option("--reuse", c.reuse, "Pilot reuse factor f (1, 2 or 4)");
  app->add_option("--cells", c.cells, "Number of cells L (a perfect square)");
  app->add_option("--users", c.users, "Users per cell K");
  app->add_option("--antennas", c.antennas, "Antennas per BS M");
  app->add_option("--fading", c.fading, "correlated | uncorrelated")->capture_default_str();
  app->add_option("--out", c.out, "Output root directory")->capture_default_str();
  app->add_option("--tag", c.tag, "Run tag (default: UTC timestamp)");
  if (with_threads) app->add_option("--threads", c.threads, "Worker threads (0: all cores)");
  app->add_flag("-v,--verbose", c.verbose, "Progress output on stderr");
}

NetworkConfig resolve_config(NetworkConfig base, const Common& c) {
  NetworkConfig cfg = c.config.empty() ? base : config_from_json(
      [&] {
        std::ifstream in(c.config);
        if (!in) throw ConfigError("cannot open config file '" + c.config + "'");
        try {
          return nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError("config file '" + c.config + "' is not valid JSON: " + e.what());
        }
      }(),
      base);
  if (c.seed) cfg.seed = *c.seed;
  if (c.reuse) cfg.pilot_reuse = *c.reuse;
  if (c.cells) cfg.num_cells = *c.cells;
  if (c.users) cfg.users_per_cell = *c.users;
  if (c.antennas) cfg.antennas = *c.antennas;
  cfg.validate();
  return cfg;
}

std::vector<Direction> parse_directions(const std::string& s) {
  if (s == "both") return {Direction::Uplink, Direction::Downlink};
  return {parse_direction(s)};
}

std::vector<double> parse_numbers(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw std::invalid_argument("not a number: '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

int cmd_simulate(const Common& c, Index drops, const std::string& schemes, bool dump) {
  const NetworkConfig cfg = resolve_config(NetworkConfig{}, c);
  ExperimentOptions opt;
  opt.policies = parse_policy_list(schemes);
  opt.directions = parse_directions(c.direction);
  opt.fading = parse_fading(c.fading);
  opt.drops = drops;
  opt.threads = c.threads;
  if (drops < 1) throw std::invalid_argument("--drops must be positive");

  const auto res = run_experiment(cfg, opt);
  const auto dir = make_output_dir(c.out, "simulate", c.tag);
  nlohmann::json resolved = config_to_json(cfg);
  resolved["fading"] = to_string(opt.fading);
  resolved["drops"] = drops;
  resolved["schemes"] = schemes;
  resolved["direction"] = c.direction;
  write_json_file(dir / "config.resolved.json", resolved);
  {
    std::ofstream csv(dir / "results.csv");
    write_results_csv(csv, res);
  }
  write_json_file(dir / "summary.json", summary_json(res));
  if (dump) {
    for (Index i = 0; i < drops; ++i) {
      const auto net = realize_network(cfg, static_cast<std::uint64_t>(i));
      const auto sets = build_coefficients(net, cfg, opt.fading, opt.directions);
      for (const auto& s : sets) {
        write_json_file(dir / ("coefficients_" + std::to_string(i) + "_" +
                               std::string(to_string(s.direction)) + ".json"),
                        coefficients_to_json(s));
      }
    }
  }
  if (c.verbose) std::cerr << "wrote " << dir.string() << " in " << res.runtime_s << " s\n";
  std::cout << dir.string() << '\n';
  return kExitOk;
}

int cmd_scalability(const Common& c, const std::string& offsets, std::uint64_t drop) {
  NetworkConfig base;
  base.users_per_cell = 2;
  const NetworkConfig cfg = resolve_config(base, c);
  if (c.direction == "both") throw std::invalid_argument("scalability needs --direction ul or dl");
  const Direction d = parse_direction(c.direction);
  const FadingModel fading = parse_fading(c.fading);
  const auto off = parse_numbers(offsets);
  const auto rows = scalability_sweep(cfg, off, fading, d, drop);

  const auto dir = make_output_dir(c.out, "scalability", c.tag);
  nlohmann::json resolved = config_to_json(cfg);
  resolved["fading"] = to_string(fading);
  resolved["direction"] = to_string(d);
  resolved["offsets_db"] = off;
  resolved["drop"] = drop;
  write_json_file(dir / "config.resolved.json", resolved);
  {
    std::ofstream csv(dir / "results.csv");
    write_scalability_csv(csv, rows);
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    table.push_back({{"offset_db", r.offset_db},
                     {"nwmmf_sum_se", r.nwmmf_sum_se},
                     {"nwpf_sum_se", r.nwpf_sum_se},
                     {"gm_sum_se", r.gm_sum_se},
                     {"gm_other_cells_sum_se", r.gm_other_cells_sum_se},
                     {"gm_without_cell_sum_se", r.gm_without_cell_sum_se},
                     {"nwmmf_min_se", r.nwmmf_min_se},
                     {"user_a_full_power_se", r.user_a_full_power_se}});
  }
  write_json_file(dir / "summary.json", {{"config", config_to_json(cfg)}, {"rows", table}});
  std::cout << dir.string() << '\n';
  return kExitOk;
}

int cmd_power_sweep(const Common& c, Index drops, const std::string& schemes,
                    const std::string& ul, const std::string& dl) {
  NetworkConfig base;
  base.num_cells = 4;
  base.users_per_cell = 2;
  const NetworkConfig cfg = resolve_config(base, c);
  ExperimentOptions opt;
  opt.policies = parse_policy_list(schemes);
  opt.directions = parse_directions(c.direction);
  opt.fading = parse_fading(c.fading);
  opt.drops = drops;
  opt.threads = c.threads;
  if (drops < 1) throw std::invalid_argument("--drops must be positive");
  const auto ulb = parse_numbers(ul);
  const auto dlb = parse_numbers(dl);
  const auto rows = power_budget_sweep(cfg, ulb, dlb, opt);

  const auto dir = make_output_dir(c.out, "power-sweep", c.tag);
  nlohmann::json resolved = config_to_json(cfg);
  resolved["fading"] = to_string(opt.fading);
  resolved["drops"] = drops;
  resolved["schemes"] = schemes;
  resolved["direction"] = c.direction;
  resolved["ul_budgets_w"] = ulb;
  resolved["dl_budgets_w"] = dlb;
  write_json_file(dir / "config.resolved.json", resolved);
  {
    std::ofstream csv(dir / "results.csv");
    write_budget_csv(csv, rows);
  }
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    table.push_back({{"direction", to_string(r.direction)},
                     {"budget_w", r.budget_w},
                     {"scheme", to_string(r.policy)},
                     {"p5_sum_se", r.p5_sum_se},
                     {"median_sum_se", r.median_sum_se}});
  }
  write_json_file(dir / "summary.json", {{"config", config_to_json(cfg)}, {"rows", table}});
  std::cout << dir.string() << '\n';
  return kExitOk;
}

int cmd_solve(const std::string& input, const std::string& scheme_name, double epsilon,
              const std::string& output) {
  const Scheme scheme = parse_scheme(scheme_name);
  nlohmann::json j;
  try {
    if (input == "-") {
      j = nlohmann::json::parse(std::cin);
    } else {
      std::ifstream in(input);
      if (!in) throw ConfigError("cannot open coefficient file '" + input + "'");
      j = nlohmann::json::parse(in);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed coefficient file: ") + e.what());
  }
  const SinrCoefficientSet coeffs = coefficients_from_json(j);
  ProblemOptions po;
  po.epsilon = epsilon;
  const auto problem = build_problem(coeffs, scheme, po);
  const auto outcome = solve(problem);
  const auto report = verify_kkt(problem, outcome);
  const std::string text = outcome_to_json(outcome, report).dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    write_text(output, text);
  }
  if (outcome.status != SolveStatus::Optimal) {
    std::cerr << "solver status: " << to_string(outcome.status) << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell massive MIMO power control: per-cell max-min (geometric mean), "
               "network-wide max-min and proportional fairness."};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Common common;
  Index drops = 10;
  std::string schemes = "gm,nwmmf,nwpf,approx";
  bool dump = false;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo drops; SE per user and scheme");
  add_common(sim, common);
  sim->add_option("--drops", drops, "Number of drops")->capture_default_str();
  sim->add_option("--schemes", schemes, "Comma-separated schemes")->capture_default_str();
  sim->add_option("--direction", common.direction, "ul | dl | both")->capture_default_str();
  sim->add_flag("--dump-coefficients", dump,
                "Also write coefficients_<drop>_<dir>.json (input format of 'solve')");
  sim->footer(kFooter);

  std::string offsets = "0,-20,-40,-60,-80,-100,-120,-140,-160,-180,-200,-220";
  std::uint64_t drop_index = 0;
  Common scal_common;
  scal_common.direction = "ul";
  auto* scal = app.add_subcommand("scalability",
                                  "Sum SE vs a scaled large-scale fading of user A (K=2 default)");
  add_common(scal, scal_common, false);
  scal->add_option("--offsets", offsets, "Offsets in dB")->capture_default_str();
  scal->add_option("--drop", drop_index, "Drop index of the realization")->capture_default_str();
  scal->add_option("--direction", scal_common.direction, "ul | dl")->capture_default_str();
  scal->footer(kFooter);

  Common sweep_common;
  Index sweep_drops = 20;
  std::string sweep_schemes = "gm,nwmmf,nwpf";
  std::string ul_budgets = join(kDefaultUlBudgets);
  std::string dl_budgets = join(kDefaultDlBudgets);
  auto* sweep = app.add_subcommand("power-sweep",
                                   "Percentile sum SE per power budget (L=4, K=2 default)");
  add_common(sweep, sweep_common);
  sweep->add_option("--drops", sweep_drops, "Drops per budget point")->capture_default_str();
  sweep->add_option("--schemes", sweep_schemes, "Comma-separated schemes")->capture_default_str();
  sweep->add_option("--direction", sweep_common.direction, "ul | dl | both")->capture_default_str();
  sweep->add_option("--ul-budgets", ul_budgets, "UL budgets in W")->capture_default_str();
  sweep->add_option("--dl-budgets", dl_budgets, "DL budgets in W")->capture_default_str();
  sweep->footer(kFooter);

  std::string input;
  std::string scheme_name;
  std::string output;
  double epsilon = 1e-3;
  auto* slv = app.add_subcommand("solve", "Solve one serialized coefficient set; prints JSON");
  slv->add_option("--input", input, "Coefficient JSON file, '-' for stdin")->required();
  slv->add_option("--scheme", scheme_name, "gm | nwmmf | nwpf")->required();
  slv->add_option("--epsilon", epsilon, "GM control parameter")->capture_default_str();
  slv->add_option("--output", output, "Write the JSON here instead of stdout");

  bool perturb = false;
  auto* st = app.add_subcommand("selftest", "Embedded invariant checks");
  st->add_flag("--perturb", perturb, "Tamper with solver-side coefficients (must fail)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(common, drops, schemes, dump);
    if (*scal) return cmd_scalability(scal_common, offsets, drop_index);
    if (*sweep) return cmd_power_sweep(sweep_common, sweep_drops, sweep_schemes, ul_budgets, dl_budgets);
    if (*slv) return cmd_solve(input, scheme_name, epsilon, output);
    if (*st) return run_selftest(std::cout, perturb) == 0 ? kExitOk : kExitSelftest;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitConfig;
}
