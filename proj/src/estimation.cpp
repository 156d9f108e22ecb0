#include "mimopc/estimation.hpp"

#include <numbers>
#include <stdexcept>

namespace mimopc {

CorrelationProvider make_correlation_provider(const NetworkRealization& net, CorrelationKind kind,
                                              double asd_deg, Index antennas) {
  const double asd = asd_deg * std::numbers::pi / 180.0;
  if (kind == CorrelationKind::ScaledIdentity) {
    return [&net, antennas](Index bs, Index cell, Index user) {
      return uncorrelated<double>(net.beta(bs, cell, user), antennas);
    };
  }
  return [&net, antennas, asd](Index bs, Index cell, Index user) {
    return local_scattering<double>(net.beta(bs, cell, user), net.aoa(bs, cell, user), asd,
                                    antennas);
  };
}

CorrelationMatrixXd pilot_observation_matrix(std::span<const CorrelationMatrixXd> group,
                                             double rho_tau) {
  if (group.empty()) throw std::invalid_argument("pilot group is empty");
  const Index M = group.front().rows();
  CorrelationMatrixXd psi_inv = CorrelationMatrixXd::Identity(M, M);
  for (const auto& R : group) psi_inv += rho_tau * R;
  return psi_inv;
}

LinkEstimate ew_mmse_link(const CorrelationMatrixXd& R, const CorrelationMatrixXd& psi_inv,
                          double rho_tau) {
  LinkEstimate est;
  est.d = R.diagonal().real();
  // diag(Psi^{-1}) >= 1, never singular.
  est.lambda = psi_inv.diagonal().real().cwiseInverse();
  const Eigen::VectorXd w = est.d.cwiseProduct(est.lambda);
  est.sigma = rho_tau * (w.asDiagonal() * psi_inv * w.asDiagonal());
  return est;
}

namespace {

// tr(A B) for square A, B without forming the product.
double trace_of_product(const CorrelationMatrixXd& A, const CorrelationMatrixXd& B) {
  return (A.array() * B.transpose().array()).sum().real();
}

}  // namespace

void ew_mmse_stats_for_bs(Index bs, std::span<const CorrelationMatrixXd> at_bs,
                          const PilotAssignment& pilots, double rho_ul, double tau_p,
                          EstimationStatistics& stats) {
  const Index L = stats.num_cells;
  const Index K = stats.users_per_cell;
  const double rho_tau = rho_ul * tau_p;
  const auto& group = pilots.sharing(bs);

  std::vector<CorrelationMatrixXd> members;
  members.reserve(group.size());
  for (Index k = 0; k < K; ++k) {
    members.clear();
    for (Index j : group) members.push_back(at_bs[static_cast<std::size_t>(user_index(j, k, K))]);
    const CorrelationMatrixXd psi_inv = pilot_observation_matrix(members, rho_tau);
    const Index u = user_index(bs, k, K);
    const LinkEstimate est = ew_mmse_link(at_bs[static_cast<std::size_t>(u)], psi_inv, rho_tau);

    stats.tr_sigma(u) = est.trace_sigma();
    const Eigen::VectorXd lambda_d = est.lambda.cwiseProduct(est.d);
    for (Index lp = 0; lp < L; ++lp) {
      const auto& Rp = at_bs[static_cast<std::size_t>(user_index(lp, k, K))];
      stats.tr_dld(u, lp) = Rp.diagonal().real().dot(lambda_d);
    }
    for (Index v = 0; v < L * K; ++v) {
      stats.tr_r_sigma(u, v) = trace_of_product(at_bs[static_cast<std::size_t>(v)], est.sigma);
    }
  }
}

EstimationStatistics ew_mmse_stats(Index num_cells, Index users_per_cell, Index antennas,
                                   const CorrelationProvider& correlation,
                                   const PilotAssignment& pilots, double rho_ul, double tau_p) {
  if (rho_ul < 0 || tau_p <= 0) throw std::invalid_argument("rho_ul >= 0 and tau_p > 0 required");
  const Index L = num_cells;
  const Index K = users_per_cell;
  EstimationStatistics stats;
  stats.num_cells = L;
  stats.users_per_cell = K;
  stats.antennas = antennas;
  stats.tr_sigma = Eigen::VectorXd::Zero(L * K);
  stats.tr_dld = Eigen::MatrixXd::Zero(L * K, L);
  stats.tr_r_sigma = Eigen::MatrixXd::Zero(L * K, L * K);

  std::vector<CorrelationMatrixXd> at_bs(static_cast<std::size_t>(L * K));
  for (Index bs = 0; bs < L; ++bs) {
    for (Index l = 0; l < L; ++l) {
      for (Index k = 0; k < K; ++k) {
        at_bs[static_cast<std::size_t>(user_index(l, k, K))] = correlation(bs, l, k);
      }
    }
    ew_mmse_stats_for_bs(bs, at_bs, pilots, rho_ul, tau_p, stats);
  }
  return stats;
}

double mmse_gamma(double beta, std::span<const double> group_betas, double rho_ul, double tau_p) {
  double total = 0.0;
  for (double b : group_betas) total += b;
  return tau_p * rho_ul * beta * beta / (1.0 + tau_p * rho_ul * total);
}

LinkArray<double> mmse_gamma_array(const LinkArray<double>& beta, const PilotAssignment& pilots,
                                   double rho_ul, double tau_p) {
  const Index L = beta.num_cells();
  const Index K = beta.users_per_cell();
  LinkArray<double> gamma(L, K);
  std::vector<double> group;
  for (Index bs = 0; bs < L; ++bs) {
    for (Index l = 0; l < L; ++l) {
      for (Index k = 0; k < K; ++k) {
        group.clear();
        for (Index j : pilots.sharing(l)) group.push_back(beta(bs, j, k));
        gamma(bs, l, k) = mmse_gamma(beta(bs, l, k), group, rho_ul, tau_p);
      }
    }
  }
  return gamma;
}

}  // namespace mimopc
