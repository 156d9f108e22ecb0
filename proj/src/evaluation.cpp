#include "mimopc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

#include "mimopc/heuristic.hpp"

namespace mimopc {

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::Gm: return "gm";
    case Policy::NwMmf: return "nwmmf";
    case Policy::NwPf: return "nwpf";
    case Policy::Approx: return "approx";
  }
  return "unknown";
}

Policy parse_policy(std::string_view s) {
  std::string n;
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ') continue;
    n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (n == "gm" || n == "gmpercellmmf") return Policy::Gm;
  if (n == "nwmmf") return Policy::NwMmf;
  if (n == "nwpf") return Policy::NwPf;
  if (n == "approx" || n == "heuristic") return Policy::Approx;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

std::vector<Policy> parse_policy_list(std::string_view csv) {
  std::vector<Policy> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t end = std::min(csv.find(',', start), csv.size());
    const auto item = csv.substr(start, end - start);
    if (!item.empty()) {
      const Policy p = parse_policy(item);
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty scheme list");
  return out;
}

double spectral_efficiency(double sinr, Index tau_c, Index tau_p, Index tau_u, Index tau_d,
                           Direction direction) {
  const Index other = direction == Direction::Uplink ? tau_d : tau_u;
  const double prelog = 1.0 - static_cast<double>(tau_p + other) / static_cast<double>(tau_c);
  if (prelog < 0) throw std::invalid_argument("negative prelog factor");
  return prelog * std::log2(1.0 + sinr);
}

double spectral_efficiency(double sinr, const NetworkConfig& cfg, Direction direction) {
  return spectral_efficiency(sinr, cfg.coherence_block, cfg.tau_p(), cfg.tau_u(), cfg.tau_d(),
                             direction);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0 && q <= 1)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

Ecdf ecdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  Ecdf e;
  e.p.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    e.p[i] = static_cast<double>(i + 1) / static_cast<double>(values.size());
  }
  e.x = std::move(values);
  return e;
}

const PolicyResult& DropSummary::get(Policy p, Direction d) const {
  for (const auto& r : results) {
    if (r.policy == p && r.direction == d) return r;
  }
  throw std::out_of_range("policy/direction not present in drop");
}

const SeriesStats& ExperimentResult::get(Policy p, Direction d) const {
  for (const auto& s : series) {
    if (s.policy == p && s.direction == d) return s;
  }
  throw std::out_of_range("policy/direction not present in experiment");
}

namespace {

Scheme scheme_of(Policy p) {
  switch (p) {
    case Policy::Gm: return Scheme::GmPerCellMmf;
    case Policy::NwMmf: return Scheme::NetworkMmf;
    case Policy::NwPf: return Scheme::NetworkPf;
    case Policy::Approx: break;
  }
  throw std::invalid_argument("policy has no optimization scheme");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DropSummary run_drop(const NetworkConfig& cfg, const NetworkRealization& net,
                     const ExperimentOptions& options, std::uint64_t index) {
  DropSummary drop;
  drop.index = index;
  drop.seed = drop_seed(cfg.seed, index);
  const Index L = net.num_cells;
  const Index K = net.users_per_cell;

  std::vector<SinrCoefficientSet> sets;
  try {
    sets = build_coefficients(net, cfg, options.fading, options.directions);
  } catch (const std::exception& e) {
    throw SolverFailure(index, std::string("coefficient construction failed: ") + e.what());
  }

  for (std::size_t di = 0; di < options.directions.size(); ++di) {
    const Direction dir = options.directions[di];
    const auto& coeffs = sets[di];
    const bool all_alive = (coeffs.a.array() > 0).all();
    std::optional<HeuristicOutcome> heuristic;

    for (Policy policy : options.policies) {
      const auto t0 = std::chrono::steady_clock::now();
      PolicyResult r;
      r.policy = policy;
      r.direction = dir;
      if (policy == Policy::Approx) {
        if (all_alive) {
          heuristic = approx_percell(coeffs);
          r.eta = heuristic->eta;
          r.sinr = heuristic->approx_sinr;
        } else {
          // Some user has no useful signal; report zero for everybody.
          r.eta = Eigen::VectorXd::Zero(L * K);
          r.sinr = Eigen::VectorXd::Zero(L * K);
        }
      } else {
        SolveOutcome out;
        try {
          out = solve(coeffs, scheme_of(policy), cfg.epsilon, options.solver);
        } catch (const std::exception& e) {
          throw SolverFailure(index, std::string(to_string(policy)) + ": " + e.what());
        }
        if (out.status != SolveStatus::Optimal) {
          throw SolverFailure(index, std::string(to_string(policy)) + " " +
                                         std::string(to_string(dir)) + ": solver status " +
                                         std::string(to_string(out.status)));
        }
        r.eta = out.eta;
        r.sinr = out.sinr;
        r.log_objective = out.log_objective;
        r.kkt_residual = out.kkt_residual;
        r.iterations = out.iterations;
      }
      r.se.resize(L * K);
      for (Index u = 0; u < L * K; ++u) r.se(u) = spectral_efficiency(r.sinr(u), cfg, dir);
      r.sum_se = r.se.sum();
      r.cell_min_se.resize(L);
      for (Index l = 0; l < L; ++l) r.cell_min_se(l) = r.se.segment(l * K, K).minCoeff();
      r.runtime_s = seconds_since(t0);
      drop.results.push_back(std::move(r));
    }
    const PolicyResult* gm = nullptr;
    for (const auto& r : drop.results) {
      if (r.policy == Policy::Gm && r.direction == dir) gm = &r;
    }
    if (gm && heuristic) {
      DominationCheck check;
      check.direction = dir;
      check.heuristic_log_objective = gm_log_objective(heuristic->cell_min_sinr, cfg.epsilon);
      check.optimal_log_objective = gm->log_objective;
      drop.domination.push_back(check);
    }
  }
  return drop;
}

void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<Index>(threads, std::max<Index>(count, 1)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  auto worker = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentResult run_experiment(const NetworkConfig& cfg, const ExperimentOptions& options,
                                const RealizationHook& hook) {
  cfg.validate();
  if (options.drops < 1) throw std::invalid_argument("at least one drop is required");
  if (options.policies.empty() || options.directions.empty()) {
    throw std::invalid_argument("no policies or directions requested");
  }
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.config = cfg;
  res.options = options;
  res.drops.resize(static_cast<std::size_t>(options.drops));

  parallel_for(options.drops, options.threads, [&](Index i) {
    const auto idx = static_cast<std::uint64_t>(i);
    NetworkRealization net;
    try {
      net = realize_network(cfg, idx);
    } catch (const std::exception& e) {
      throw SolverFailure(idx, std::string("network realization failed: ") + e.what());
    }
    if (hook) hook(net);
    res.drops[static_cast<std::size_t>(i)] = run_drop(cfg, net, options, idx);
  });

  for (Direction dir : options.directions) {
    for (Policy p : options.policies) {
      SeriesStats s;
      s.policy = p;
      s.direction = dir;
      for (const auto& d : res.drops) {
        const auto& r = d.get(p, dir);
        s.sum_se.push_back(r.sum_se);
        s.user_se.insert(s.user_se.end(), r.se.data(), r.se.data() + r.se.size());
      }
      s.p5_sum_se = quantile(s.sum_se, 0.05);
      s.p2_user_se = quantile(s.user_se, 0.02);
      s.median_sum_se = quantile(s.sum_se, 0.5);
      double total = 0.0;
      for (double v : s.sum_se) total += v;
      s.mean_sum_se = total / static_cast<double>(s.sum_se.size());
      res.series.push_back(std::move(s));
    }
  }
  res.runtime_s = seconds_since(t0);
  return res;
}

std::vector<ScalabilityRow> scalability_sweep(const NetworkConfig& cfg,
                                              const std::vector<double>& offsets_db,
                                              FadingModel fading, Direction direction,
                                              std::uint64_t drop_index,
                                              const SolveOptions& solver) {
  cfg.validate();
  const NetworkRealization nominal = realize_network(cfg, drop_index);
  const Index L = nominal.num_cells;
  const Index K = nominal.users_per_cell;
  std::vector<ScalabilityRow> rows;

  auto sum_se = [&](const Eigen::VectorXd& sinr, Index skip_cell) {
    double s = 0.0;
    for (Index u = 0; u < L * K; ++u) {
      if (u / K == skip_cell) continue;
      s += spectral_efficiency(sinr(u), cfg, direction);
    }
    return s;
  };

  for (double offset : offsets_db) {
    NetworkRealization net = nominal;
    const double scale = std::pow(10.0, offset / 10.0);
    for (Index bs = 0; bs < L; ++bs) net.beta(bs, 0, 0) *= scale;
    const auto coeffs = build_coefficients(net, cfg, fading, {direction}).front();

    ScalabilityRow row;
    row.offset_db = offset;
    const auto mmf = solve(coeffs, Scheme::NetworkMmf, cfg.epsilon, solver);
    const auto pf = solve(coeffs, Scheme::NetworkPf, cfg.epsilon, solver);
    const auto gm = solve(coeffs, Scheme::GmPerCellMmf, cfg.epsilon, solver);
    for (const auto* o : {&mmf, &pf, &gm}) {
      if (o->status != SolveStatus::Optimal) {
        throw SolverFailure(drop_index, "scalability sweep at offset " + std::to_string(offset) +
                                            " dB: " + std::string(to_string(o->scheme)) +
                                            " did not converge");
      }
    }
    row.nwmmf_sum_se = sum_se(mmf.sinr, -1);
    row.nwpf_sum_se = sum_se(pf.sinr, -1);
    row.gm_sum_se = sum_se(gm.sinr, -1);
    row.gm_other_cells_sum_se = sum_se(gm.sinr, 0);
    row.nwmmf_min_se = spectral_efficiency(mmf.sinr.minCoeff(), cfg, direction);

    ProblemOptions po;
    po.epsilon = cfg.epsilon;
    po.excluded_cells = {0};
    const auto gm_wo = solve(build_problem(coeffs, Scheme::GmPerCellMmf, po), solver);
    row.gm_without_cell_sum_se = sum_se(gm_wo.sinr, 0);

    const Eigen::VectorXd alone = evaluate_sinr(coeffs, Eigen::VectorXd::Unit(L * K, 0));
    row.user_a_full_power_se = spectral_efficiency(alone(0), cfg, direction);
    rows.push_back(row);
  }
  return rows;
}

std::vector<BudgetRow> power_budget_sweep(const NetworkConfig& cfg,
                                          const std::vector<double>& ul_budgets_w,
                                          const std::vector<double>& dl_budgets_w,
                                          const ExperimentOptions& options) {
  std::vector<BudgetRow> rows;
  auto run = [&](Direction dir, const std::vector<double>& budgets) {
    for (double b : budgets) {
      NetworkConfig c = cfg;
      (dir == Direction::Uplink ? c.ul_power_budget : c.dl_power_budget) = b;
      ExperimentOptions o = options;
      o.directions = {dir};
      const auto res = run_experiment(c, o);
      for (Policy p : o.policies) {
        const auto& s = res.get(p, dir);
        rows.push_back({dir, b, p, s.p5_sum_se, s.median_sum_se});
      }
    }
  };
  for (Direction dir : options.directions) {
    run(dir, dir == Direction::Uplink ? ul_budgets_w : dl_budgets_w);
  }
  return rows;
}

}  // namespace mimopc
