#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "mimopc/coefficients.hpp"
#include "mimopc/types.hpp"

namespace mimopc {

template <typename Scalar>
struct LinkValue {
  Scalar value;
  Scalar first;
  Scalar second;
};

/// f(x) = log(log2(1 + eps + e^x)) with its first two derivatives.
/// With s = e^x / (1 + eps + e^x) and g = ln(1 + eps + e^x):
///   f' = s / g,   f'' = (s / g) (1 - s - s / g).
/// f'' changes sign where g = s / (1 - s); for eps > 0 that happens near e^x ~ sqrt(2 eps), so
/// f is concave only to the right of that point.
template <typename Scalar>
LinkValue<Scalar> concave_link(Scalar x, Scalar eps) {
  using std::exp;
  using std::log;
  using std::log1p;
  const Scalar one(1);
  Scalar g;
  Scalar s;
  if (x > Scalar(0)) {
    const Scalar r = (one + eps) * exp(-x);
    g = x + log1p(r);
    s = one / (one + r);
  } else {
    const Scalar e = exp(x);
    g = log1p(eps + e);
    s = e / (one + eps + e);
  }
  const Scalar ratio = s / g;
  return {log(g) - log(std::numbers::ln2_v<Scalar>), ratio, ratio * (one - s - ratio)};
}

/// exp(a . x_local + log_coeff); at most three variables per term.
struct ExpTerm {
  double log_coeff = 0.0;
  int nnz = 0;
  std::array<int, 3> pos{};  // positions in LseConstraint::vars
  std::array<double, 3> weight{};
};

/// g(x) = log sum_k exp(terms_k) <= 0.
struct LseConstraint {
  enum class Kind { Sinr, Power, EtaFloor, TargetFloor };
  Kind kind = Kind::Sinr;
  Index owner = 0;  // user (Sinr, EtaFloor), cell (Power) or target variable (TargetFloor)
  std::vector<Index> vars;
  std::vector<ExpTerm> terms;

  double value(const Eigen::VectorXd& x) const;
};

/// Log-domain program over x = [tbar (targets), etabar (active users)].
struct ConvexProblem {
  Scheme scheme = Scheme::GmPerCellMmf;
  Direction direction = Direction::Uplink;
  SinrCoefficientSet coeffs;
  double epsilon = 1e-3;

  Index num_targets = 0;
  Index num_vars = 0;
  std::vector<Index> eta_var;      // per user: variable index or -1 (power pinned to 0)
  std::vector<Index> target_var;   // per user: index of the target constraining it, or -1
  std::vector<Index> target_cell;  // GM: cell owning each target variable
  std::vector<LseConstraint> constraints;
  Eigen::VectorXd x0;              // strictly feasible start
  /// NW schemes with some a = 0: the optimum is the all-zero allocation.
  bool trivial_zero = false;

  double objective(const Eigen::VectorXd& x) const;
  Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const;
  /// Diagonal of the objective Hessian (the objective is separable in the targets).
  Eigen::VectorXd objective_curvature(const Eigen::VectorXd& x) const;
};

struct ProblemOptions {
  double epsilon = 1e-3;
  /// GM only: cells forced out of the problem (targets 0, powers 0).
  std::vector<Index> excluded_cells;
  /// Lower bound on every active power coefficient.
  double eta_floor = 1e-12;
};

/// Throws std::invalid_argument for invalid coefficients.
ConvexProblem build_problem(const SinrCoefficientSet& coeffs, Scheme scheme,
                            const ProblemOptions& options = {});

enum class SolveStatus { Optimal, MaxIterations, Infeasible };
std::string_view to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-8;          // bound on the duality gap of the log-domain program
  double newton_tol = 1e-10;  // half squared Newton decrement that ends centering
  double barrier_growth = 10.0;
  int max_newton_steps = 3000;
};

struct SolveOutcome {
  Scheme scheme = Scheme::GmPerCellMmf;
  Direction direction = Direction::Uplink;
  /// Per user: the minimal-power allocation meeting `targets`, so every active SINR equals
  /// its target (falls back to the log-domain point if that system is not solvable).
  Eigen::VectorXd eta;
  Eigen::VectorXd targets;  // per user: the target constraining it (GM: its cell's t_l)
  Eigen::VectorXd sinr;     // evaluate_sinr(coeffs, eta)
  /// GM: prod_l log2(1 + eps + t_l); NW-MMF: t; NW-PF: prod t_lk.
  double objective = 0.0;
  /// GM: sum_l log log2(1 + eps + t_l); NW-MMF: log t; NW-PF: sum log t_lk.
  double log_objective = 0.0;
  double kkt_residual = 0.0;
  double constraint_violation = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
  Eigen::VectorXd duals;  // one per problem constraint
  Eigen::VectorXd x;      // final log-domain point
};

SolveOutcome solve(const ConvexProblem& problem, const SolveOptions& options = {});

/// build_problem + solve.
SolveOutcome solve(const SinrCoefficientSet& coeffs, Scheme scheme, double epsilon = 1e-3,
                   const SolveOptions& options = {});

struct KktReport {
  double stationarity = 0.0;  // relative to 1 + |grad objective|_inf
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double max_residual = 0.0;
};

/// Residuals of the log-domain KKT system at outcome.x with multipliers outcome.duals.
KktReport verify_kkt(const ConvexProblem& problem, const SolveOutcome& outcome);

/// Log-domain objective of the scheme at per-user targets or SINRs (GM takes the cell minimum).
double log_objective(const ConvexProblem& problem, const Eigen::VectorXd& targets);

/// Network-wide max-min fairness by bisection on the common target, each step a feasibility
/// test through the minimal fixed point of eta = t (G eta + d) / a.
struct BisectionResult {
  double target = 0.0;       // t*, last feasible bisection point
  double min_sinr = 0.0;     // min_u SINR_u at the returned powers
  Eigen::VectorXd eta;
  Eigen::VectorXd sinr;
  int iterations = 0;
};

/// Throws std::invalid_argument if some a <= 0, std::runtime_error if the tolerance is not
/// reached within the iteration cap.
BisectionResult bisection_nwmmf(const SinrCoefficientSet& coeffs, double rel_tol = 1e-9,
                                int max_bisections = 200);

}  // namespace mimopc
