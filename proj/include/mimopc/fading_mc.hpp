#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "mimopc/coefficients.hpp"
#include "mimopc/estimation.hpp"
#include "mimopc/geometry.hpp"
#include "mimopc/types.hpp"

namespace mimopc {

/// One small-scale fading realization of the whole network.
struct ChannelDraw {
  Index num_cells = 0;
  Index users_per_cell = 0;
  /// h^{bs}_{cell,user} at index bs * L*K + user_index(cell, user, K).
  std::vector<Eigen::VectorXcd> h;
  /// Estimate of each BS's own users, index bs * K + k.
  std::vector<Eigen::VectorXcd> hhat;
};

using ChannelSampler = std::function<ChannelDraw(Rng&)>;

/// Combining (UL) or unnormalized precoding (DL) vector of user k at BS `bs`.
using ProcessingRule = std::function<Eigen::VectorXcd(const ChannelDraw&, Index bs, Index k)>;

/// v = hhat (maximum ratio).
ProcessingRule mr_processing();

struct MonteCarloCoefficients {
  SinrCoefficientSet coeffs;
  /// Standard errors with the same layout as the coefficients. For DL they include the
  /// uncertainty of the sampled precoder normalization.
  Eigen::VectorXd se_a;
  Eigen::MatrixXd se_b;
  Eigen::MatrixXd se_c;
  Eigen::VectorXd se_d;
};

/// Sample-mean estimates of the general-fading coefficients:
///   UL: a = rho |E v^H h|^2, b = rho var(v^H h'), c = rho |E v^H h_{l'k}|^2, d = s2 E|v|^2
///   DL: the same with w = v / sqrt(E|v|^2) and d = s2.
/// Throws std::invalid_argument for fewer than 2 samples or a DL noise variance <= 0.
MonteCarloCoefficients general_fading_mc(const ChannelSampler& sampler,
                                         const ProcessingRule& rule, Index num_cells,
                                         Index users_per_cell, const PilotAssignment& pilots,
                                         double rho, double noise_var, Index n_samples,
                                         Direction direction, Rng& rng);

/// Correlated Rayleigh channels h = R^{1/2} z with EW-MMSE estimates from a received pilot
/// signal y = sum_{j in P} sqrt(rho) tau_p h_j + n, n ~ CN(0, tau_p I).
class EwMmseRayleighSampler {
 public:
  EwMmseRayleighSampler(Index num_cells, Index users_per_cell, Index antennas,
                        const CorrelationProvider& correlation, const PilotAssignment& pilots,
                        double rho_ul, double tau_p);

  ChannelDraw operator()(Rng& rng) const;

 private:
  Index L_, K_, M_;
  PilotAssignment pilots_;
  double rho_, tau_;
  std::vector<Eigen::MatrixXcd> sqrt_r_;  // bs * L*K + user
  std::vector<Eigen::VectorXd> gain_;      // sqrt(rho) D Lambda, bs * K + k
};

}  // namespace mimopc
