#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mimopc/channel.hpp"
#include "mimopc/geometry.hpp"
#include "mimopc/types.hpp"

namespace mimopc {

/// R^{bs}_{cell,user} for any link of the network.
using CorrelationProvider = std::function<CorrelationMatrixXd(Index bs, Index cell, Index user)>;

enum class CorrelationKind { LocalScattering, ScaledIdentity };

/// Correlation matrices of a realization: local scattering around the nominal AoA, or beta * I.
CorrelationProvider make_correlation_provider(const NetworkRealization& net, CorrelationKind kind,
                                              double asd_deg, Index antennas);

/// EW-MMSE quantities of one estimated channel.
struct LinkEstimate {
  Eigen::VectorXd d;          // diag(R) of the estimated link
  Eigen::VectorXd lambda;     // diag(Lambda) = 1 / diag(Psi^{-1})
  CorrelationMatrixXd sigma;  // correlation of the estimate

  double trace_sigma() const { return sigma.trace().real(); }
};

/// Psi^{-1} = sum_{j in group} rho * tau_p * R_j + I.
CorrelationMatrixXd pilot_observation_matrix(std::span<const CorrelationMatrixXd> group,
                                             double rho_tau);

/// EW-MMSE statistics of the link with correlation `R`, given the pilot observation
/// matrix of its group. Sigma = rho * tau_p * D Lambda Psi^{-1} Lambda D.
LinkEstimate ew_mmse_link(const CorrelationMatrixXd& R, const CorrelationMatrixXd& psi_inv,
                          double rho_tau);

/// Trace statistics of every BS estimating its own users. User index u = l*K + k.
struct EstimationStatistics {
  Index num_cells = 0;
  Index users_per_cell = 0;
  Index antennas = 0;
  /// tr(Sigma^l_{lk}), indexed by u = (l,k).
  Eigen::VectorXd tr_sigma;
  /// (u=(l,k), l') -> tr(D^l_{l'k} Lambda^l_{lk} D^l_{lk}).
  Eigen::MatrixXd tr_dld;
  /// (u=(l,k), v=(l',k')) -> tr(R^l_{l'k'} Sigma^l_{lk}).
  Eigen::MatrixXd tr_r_sigma;
};

/// Fills the rows of `stats` belonging to BS `bs`. `at_bs` holds R^{bs}_{l'k'} for all users
/// in flat order. Independent across BSs.
void ew_mmse_stats_for_bs(Index bs, std::span<const CorrelationMatrixXd> at_bs,
                          const PilotAssignment& pilots, double rho_ul, double tau_p,
                          EstimationStatistics& stats);

EstimationStatistics ew_mmse_stats(Index num_cells, Index users_per_cell, Index antennas,
                                   const CorrelationProvider& correlation,
                                   const PilotAssignment& pilots, double rho_ul, double tau_p);

/// MMSE variance for R = beta I:
///   gamma = tau_p rho beta^2 / (1 + tau_p rho sum_{j in group} beta_j).
/// `group_betas` lists beta of every pilot-sharing user, including the target.
double mmse_gamma(double beta, std::span<const double> group_betas, double rho_ul, double tau_p);

/// gamma(bs, cell, user) for every link of the network.
LinkArray<double> mmse_gamma_array(const LinkArray<double>& beta, const PilotAssignment& pilots,
                                   double rho_ul, double tau_p);

}  // namespace mimopc
