#pragma once

#include <Eigen/Dense>

#include "mimopc/coefficients.hpp"

namespace mimopc {

struct HeuristicOutcome {
  PowerAllocation eta;
  Eigen::VectorXd exact_sinr;     // evaluate_sinr at eta
  Eigen::VectorXd approx_sinr;    // per-user value reported by the scheme
  Eigen::VectorXd cell_min_sinr;  // per cell, min_k exact_sinr
};

/// Per-cell equalization of the received signal a * eta, ignoring pilot contamination.
/// Throws std::invalid_argument if some a <= 0 or the set is not uplink.
HeuristicOutcome approx_ul(const SinrCoefficientSet& coeffs);

/// Per-cell power split proportional to (d + sum_v b(u,v)/K) / a, normalized to the full
/// BS budget. Summing b over all users and dividing by K averages b over k', which is exact
/// when b does not depend on k'. Throws std::invalid_argument if some a <= 0 or the set is
/// not downlink.
HeuristicOutcome approx_dl(const SinrCoefficientSet& coeffs);

/// Dispatches on coeffs.direction.
HeuristicOutcome approx_percell(const SinrCoefficientSet& coeffs);

/// sum_l log log2(1 + eps + t_l) at the given per-cell SINRs.
double gm_log_objective(const Eigen::VectorXd& cell_sinr, double epsilon);

}  // namespace mimopc
