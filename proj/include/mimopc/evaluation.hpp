#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mimopc/coefficients.hpp"
#include "mimopc/config.hpp"
#include "mimopc/geometry.hpp"
#include "mimopc/solver.hpp"

namespace mimopc {

/// Power control policies compared by the experiments: the three optimal schemes and the
/// closed-form per-cell heuristic.
enum class Policy { Gm, NwMmf, NwPf, Approx };

std::string_view to_string(Policy p);
/// "gm", "nwmmf", "nwpf", "approx".
Policy parse_policy(std::string_view s);
std::vector<Policy> parse_policy_list(std::string_view csv);

/// Prelog (1 - (tau_p + tau_d)/tau_c) log2(1 + sinr) in the UL, tau_u instead of tau_d in
/// the DL. Throws std::invalid_argument if the prelog is negative.
double spectral_efficiency(double sinr, Index tau_c, Index tau_p, Index tau_u, Index tau_d,
                           Direction direction);
double spectral_efficiency(double sinr, const NetworkConfig& cfg, Direction direction);

/// Empirical quantile with linear interpolation between order statistics (q in [0, 1]).
double quantile(std::vector<double> values, double q);

/// Sorted sample values with cumulative probabilities (i+1)/n.
struct Ecdf {
  std::vector<double> x;
  std::vector<double> p;
};
Ecdf ecdf(std::vector<double> values);

/// Thrown when a drop cannot be solved; carries the drop index.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(std::uint64_t drop, const std::string& what)
      : std::runtime_error("drop " + std::to_string(drop) + ": " + what), drop_(drop) {}
  std::uint64_t drop() const { return drop_; }

 private:
  std::uint64_t drop_;
};

struct PolicyResult {
  Policy policy = Policy::Gm;
  Direction direction = Direction::Uplink;
  Eigen::VectorXd eta;
  Eigen::VectorXd sinr;  // Approx: the SINR reported by the heuristic
  Eigen::VectorXd se;
  double sum_se = 0.0;
  Eigen::VectorXd cell_min_se;
  double log_objective = 0.0;  // optimal schemes only
  double kkt_residual = 0.0;
  int iterations = 0;
  double runtime_s = 0.0;
};

/// The heuristic powers evaluated in the per-cell objective vs. the per-cell optimum.
struct DominationCheck {
  Direction direction = Direction::Uplink;
  double heuristic_log_objective = 0.0;
  double optimal_log_objective = 0.0;
  bool holds(double tol = 1e-6) const { return heuristic_log_objective <= optimal_log_objective + tol; }
};

struct DropSummary {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::vector<PolicyResult> results;
  std::vector<DominationCheck> domination;

  const PolicyResult& get(Policy p, Direction d) const;
};

struct ExperimentOptions {
  std::vector<Policy> policies{Policy::Gm, Policy::NwMmf, Policy::NwPf, Policy::Approx};
  std::vector<Direction> directions{Direction::Uplink, Direction::Downlink};
  FadingModel fading = FadingModel::Uncorrelated;
  Index drops = 10;
  unsigned threads = 0;  // 0: hardware concurrency
  SolveOptions solver;
};

/// Statistics of one (policy, direction) pair over all drops.
struct SeriesStats {
  Policy policy = Policy::Gm;
  Direction direction = Direction::Uplink;
  std::vector<double> user_se;     // pooled, drop-major
  std::vector<double> sum_se;      // per drop
  double p5_sum_se = 0.0;          // 95%-likely sum SE
  double p2_user_se = 0.0;         // 98%-likely per-user SE
  double median_sum_se = 0.0;
  double mean_sum_se = 0.0;
};

struct ExperimentResult {
  NetworkConfig config;
  ExperimentOptions options;
  std::vector<DropSummary> drops;
  std::vector<SeriesStats> series;
  double runtime_s = 0.0;

  const SeriesStats& get(Policy p, Direction d) const;
};

/// Optional per-drop modification of the realization before coefficients are built.
using RealizationHook = std::function<void(NetworkRealization&)>;

/// Solves every requested policy and direction on one realization.
DropSummary run_drop(const NetworkConfig& cfg, const NetworkRealization& net,
                     const ExperimentOptions& options, std::uint64_t index);

/// Drops run in parallel; drop i uses the realization seeded by drop_seed(cfg.seed, i) and
/// results are folded in drop order, so they do not depend on the thread count.
/// Throws SolverFailure for the lowest failing drop index.
ExperimentResult run_experiment(const NetworkConfig& cfg, const ExperimentOptions& options,
                                const RealizationHook& hook = {});

/// Runs `count` jobs on up to `threads` workers; exceptions are rethrown for the lowest index.
void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& job);

struct ScalabilityRow {
  double offset_db = 0.0;
  double nwmmf_sum_se = 0.0;
  double nwpf_sum_se = 0.0;
  double gm_sum_se = 0.0;
  double gm_other_cells_sum_se = 0.0;  // GM sum SE outside user A's cell
  double nwmmf_min_se = 0.0;
  /// GM re-solved with user A's cell removed; sum SE over the remaining cells.
  double gm_without_cell_sum_se = 0.0;
  /// SE of user A at full power with every other transmitter silent (upper bound for NW-MMF).
  double user_a_full_power_se = 0.0;
};

/// User A is user 0 of cell 0. All of its links are scaled by 10^(offset/10).
std::vector<ScalabilityRow> scalability_sweep(const NetworkConfig& cfg,
                                              const std::vector<double>& offsets_db,
                                              FadingModel fading, Direction direction,
                                              std::uint64_t drop_index = 0,
                                              const SolveOptions& solver = {});

struct BudgetRow {
  Direction direction = Direction::Uplink;
  double budget_w = 0.0;
  Policy policy = Policy::Gm;
  double p5_sum_se = 0.0;
  double median_sum_se = 0.0;
};

std::vector<BudgetRow> power_budget_sweep(const NetworkConfig& cfg,
                                          const std::vector<double>& ul_budgets_w,
                                          const std::vector<double>& dl_budgets_w,
                                          const ExperimentOptions& options);

inline const std::vector<double> kDefaultUlBudgets{0.01, 0.05, 0.1, 0.2, 0.5, 1.0};
inline const std::vector<double> kDefaultDlBudgets{1.0, 5.0, 10.0, 20.0, 40.0, 80.0};

}  // namespace mimopc
