#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mimopc/config.hpp"
#include "mimopc/estimation.hpp"
#include "mimopc/geometry.hpp"
#include "mimopc/types.hpp"

namespace mimopc {

/// Coefficients of the general effective SINR
///
///   SINR_u(eta) = a_u eta_u / (sum_v b(u,v) eta_v + sum_{l' in P[l] \ {l}} c(u,l') eta_{l'k} + d_u)
///
/// for u = (l,k). All users are flat-indexed by u = l*K + k. The coherent self term of the
/// closed forms is already folded into b(u,u), so every entry is nonnegative.
struct SinrCoefficientSet {
  Direction direction = Direction::Uplink;
  Index num_cells = 0;
  Index users_per_cell = 0;
  Eigen::VectorXd a;  // LK
  Eigen::MatrixXd b;  // LK x LK, (victim u, interferer v)
  Eigen::MatrixXd c;  // LK x L, (victim u, contaminating cell l'); zero off P[l] \ {l}
  Eigen::VectorXd d;  // LK, > 0
  PilotAssignment pilots;

  Index num_users() const { return num_cells * users_per_cell; }

  /// b plus the contamination terms spread onto the pilot-sharing users, so that the
  /// denominator reads G * eta + d.
  Eigen::MatrixXd coupling_matrix() const;

  /// Throws std::invalid_argument on size mismatch, negative or non-finite entries, d <= 0.
  void validate() const;
};

/// eta per user (flat). UL: 0 <= eta <= 1; DL: eta >= 0 and per-cell sum <= 1.
using PowerAllocation = Eigen::VectorXd;

bool is_feasible_allocation(const PowerAllocation& eta, Direction direction, Index num_cells,
                            Index users_per_cell, double tol = 1e-12);

/// Full power: eta = 1 (UL) or an equal split 1/K per BS (DL).
PowerAllocation full_power_allocation(Direction direction, Index num_cells, Index users_per_cell);

Eigen::VectorXd evaluate_sinr(const SinrCoefficientSet& coeffs, const PowerAllocation& eta);

// Closed forms with MR processing. Noise variance is 1 (powers are normalized).

SinrCoefficientSet ul_uncorrelated(const LinkArray<double>& gamma, const LinkArray<double>& beta,
                                   Index antennas, double rho_ul, const PilotAssignment& pilots);
SinrCoefficientSet dl_uncorrelated(const LinkArray<double>& gamma, const LinkArray<double>& beta,
                                   Index antennas, double rho_dl, const PilotAssignment& pilots);

/// A user whose estimate is identically zero (tr Sigma = 0) gets a = 0 and d = 1.
SinrCoefficientSet ul_correlated(const EstimationStatistics& stats, double rho_ul, double tau_p,
                                 const PilotAssignment& pilots);
/// Throws std::domain_error if some serving estimate has tr Sigma = 0 (its MR precoder is
/// undefined).
SinrCoefficientSet dl_correlated(const EstimationStatistics& stats, double rho_dl, double rho_ul,
                                 double tau_p, const PilotAssignment& pilots);

/// Deterministic (line-of-sight) channels hbar(bs, cell, user) with arbitrary combiners
/// (UL, v_u at the serving BS) or precoders (DL, w_u at the serving BS). No pilot
/// contamination: c = 0 and every cell gets its own pilot group.
SinrCoefficientSet los_coefficients(const LinkArray<Eigen::VectorXcd>& channels,
                                    const std::vector<Eigen::VectorXcd>& processing, double rho,
                                    double noise_var, Direction direction);

/// UL and DL coefficient sets of one realization.
struct CoefficientPair {
  SinrCoefficientSet uplink;
  SinrCoefficientSet downlink;
};

CoefficientPair build_coefficients(const NetworkRealization& net, const NetworkConfig& cfg,
                                   FadingModel fading);

/// Only the requested directions, in order. Channel statistics are shared between them.
std::vector<SinrCoefficientSet> build_coefficients(const NetworkRealization& net,
                                                   const NetworkConfig& cfg, FadingModel fading,
                                                   const std::vector<Direction>& directions);

/// Correlated pipeline with an explicit correlation model (ScaledIdentity gives R = beta I).
std::vector<SinrCoefficientSet> build_correlated_coefficients(
    const NetworkRealization& net, const NetworkConfig& cfg, CorrelationKind kind,
    const std::vector<Direction>& directions);

}  // namespace mimopc
