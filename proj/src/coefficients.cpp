#include "mimopc/coefficients.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mimopc {

Eigen::MatrixXd SinrCoefficientSet::coupling_matrix() const {
  const Index L = num_cells;
  const Index K = users_per_cell;
  Eigen::MatrixXd G = b;
  for (Index l = 0; l < L; ++l) {
    for (Index lp : pilots.sharing(l)) {
      if (lp == l) continue;
      for (Index k = 0; k < K; ++k) {
        G(user_index(l, k, K), user_index(lp, k, K)) += c(user_index(l, k, K), lp);
      }
    }
  }
  return G;
}

void SinrCoefficientSet::validate() const {
  const Index n = num_users();
  if (num_cells < 1 || users_per_cell < 1) throw std::invalid_argument("empty coefficient set");
  if (a.size() != n || d.size() != n || b.rows() != n || b.cols() != n || c.rows() != n ||
      c.cols() != num_cells || pilots.num_cells() != num_cells) {
    throw std::invalid_argument("coefficient set has inconsistent dimensions");
  }
  auto check = [](const auto& m, const char* name) {
    if (!m.allFinite()) throw std::invalid_argument(std::string(name) + " has non-finite entries");
    if ((m.array() < 0).any()) throw std::invalid_argument(std::string(name) + " is negative");
  };
  check(a, "a");
  check(b, "b");
  check(c, "c");
  check(d, "d");
  if ((d.array() <= 0).any()) throw std::invalid_argument("d must be strictly positive");
}

bool is_feasible_allocation(const PowerAllocation& eta, Direction direction, Index num_cells,
                            Index users_per_cell, double tol) {
  if (eta.size() != num_cells * users_per_cell) return false;
  if ((eta.array() < -tol).any()) return false;
  if (direction == Direction::Uplink) return (eta.array() <= 1.0 + tol).all();
  for (Index l = 0; l < num_cells; ++l) {
    if (eta.segment(l * users_per_cell, users_per_cell).sum() > 1.0 + tol) return false;
  }
  return true;
}

PowerAllocation full_power_allocation(Direction direction, Index num_cells, Index users_per_cell) {
  const double v = direction == Direction::Uplink ? 1.0 : 1.0 / static_cast<double>(users_per_cell);
  return PowerAllocation::Constant(num_cells * users_per_cell, v);
}

Eigen::VectorXd evaluate_sinr(const SinrCoefficientSet& coeffs, const PowerAllocation& eta) {
  if (eta.size() != coeffs.num_users()) throw std::invalid_argument("eta has wrong size");
  const Eigen::VectorXd denom = coeffs.coupling_matrix() * eta + coeffs.d;
  return coeffs.a.cwiseProduct(eta).cwiseQuotient(denom);
}

namespace {

SinrCoefficientSet empty_set(Direction dir, Index L, Index K, const PilotAssignment& pilots) {
  SinrCoefficientSet s;
  s.direction = dir;
  s.num_cells = L;
  s.users_per_cell = K;
  s.a = Eigen::VectorXd::Zero(L * K);
  s.b = Eigen::MatrixXd::Zero(L * K, L * K);
  s.c = Eigen::MatrixXd::Zero(L * K, L);
  s.d = Eigen::VectorXd::Ones(L * K);
  s.pilots = pilots;
  return s;
}

}  // namespace

SinrCoefficientSet ul_uncorrelated(const LinkArray<double>& gamma, const LinkArray<double>& beta,
                                   Index antennas, double rho_ul, const PilotAssignment& pilots) {
  const Index L = beta.num_cells();
  const Index K = beta.users_per_cell();
  const auto M = static_cast<double>(antennas);
  auto s = empty_set(Direction::Uplink, L, K, pilots);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      s.a(u) = M * rho_ul * gamma(l, l, k);
      for (Index lp = 0; lp < L; ++lp) {
        for (Index kp = 0; kp < K; ++kp) s.b(u, user_index(lp, kp, K)) = rho_ul * beta(l, lp, kp);
      }
      for (Index lp : pilots.sharing(l)) {
        if (lp != l) s.c(u, lp) = M * rho_ul * gamma(l, lp, k);
      }
    }
  }
  return s;
}

SinrCoefficientSet dl_uncorrelated(const LinkArray<double>& gamma, const LinkArray<double>& beta,
                                   Index antennas, double rho_dl, const PilotAssignment& pilots) {
  const Index L = beta.num_cells();
  const Index K = beta.users_per_cell();
  const auto M = static_cast<double>(antennas);
  auto s = empty_set(Direction::Downlink, L, K, pilots);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      s.a(u) = M * rho_dl * gamma(l, l, k);
      for (Index lp = 0; lp < L; ++lp) {
        for (Index kp = 0; kp < K; ++kp) s.b(u, user_index(lp, kp, K)) = rho_dl * beta(lp, l, k);
      }
      for (Index lp : pilots.sharing(l)) {
        if (lp != l) s.c(u, lp) = M * rho_dl * gamma(lp, l, k);
      }
    }
  }
  return s;
}

SinrCoefficientSet ul_correlated(const EstimationStatistics& stats, double rho_ul, double tau_p,
                                 const PilotAssignment& pilots) {
  const Index L = stats.num_cells;
  const Index K = stats.users_per_cell;
  const double rho_tau = rho_ul * tau_p;
  auto s = empty_set(Direction::Uplink, L, K, pilots);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      const double coherent = rho_tau * stats.tr_dld(u, l);
      s.a(u) = rho_ul * coherent * coherent;
      s.b.row(u) = rho_ul * stats.tr_r_sigma.row(u);
      for (Index lp : pilots.sharing(l)) {
        if (lp == l) continue;
        const double cross = rho_tau * stats.tr_dld(u, lp);
        s.c(u, lp) = rho_ul * cross * cross;
      }
      s.d(u) = stats.tr_sigma(u) > 0 ? stats.tr_sigma(u) : 1.0;
    }
  }
  return s;
}

SinrCoefficientSet dl_correlated(const EstimationStatistics& stats, double rho_dl, double rho_ul,
                                 double tau_p, const PilotAssignment& pilots) {
  const Index L = stats.num_cells;
  const Index K = stats.users_per_cell;
  const double rho_tau = rho_ul * tau_p;
  for (Index u = 0; u < L * K; ++u) {
    if (!(stats.tr_sigma(u) > 0)) {
      throw std::domain_error("serving estimate of user " + std::to_string(u) +
                              " is identically zero; MR precoder undefined");
    }
  }
  auto s = empty_set(Direction::Downlink, L, K, pilots);
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      const double own_tr = stats.tr_sigma(u);
      const double coherent = rho_tau * stats.tr_dld(u, l);
      s.a(u) = rho_dl * coherent * coherent;
      s.d(u) = own_tr;
      for (Index lp = 0; lp < L; ++lp) {
        for (Index kp = 0; kp < K; ++kp) {
          const Index v = user_index(lp, kp, K);
          // BS l' precoding towards its own user (l',k') leaks onto user (l,k).
          s.b(u, v) = rho_dl * stats.tr_r_sigma(v, u) * own_tr / stats.tr_sigma(v);
        }
      }
      for (Index lp : pilots.sharing(l)) {
        if (lp == l) continue;
        const Index v = user_index(lp, k, K);
        const double cross = rho_tau * stats.tr_dld(v, l);
        s.c(u, lp) = rho_dl * cross * cross * own_tr / stats.tr_sigma(v);
      }
    }
  }
  return s;
}

SinrCoefficientSet los_coefficients(const LinkArray<Eigen::VectorXcd>& channels,
                                    const std::vector<Eigen::VectorXcd>& processing, double rho,
                                    double noise_var, Direction direction) {
  const Index L = channels.num_cells();
  const Index K = channels.users_per_cell();
  if (static_cast<Index>(processing.size()) != L * K) {
    throw std::invalid_argument("one combiner/precoder per user is required");
  }
  if (!(noise_var > 0)) throw std::invalid_argument("noise variance must be positive");
  for (const auto& v : processing) {
    if (v.norm() == 0.0) throw std::invalid_argument("zero-norm combiner/precoder");
  }
  auto s = empty_set(direction, L, K, PilotAssignment::orthogonal(L));
  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      const auto& own = processing[static_cast<std::size_t>(u)];
      s.a(u) = rho * std::norm(own.dot(channels(l, l, k)));
      for (Index lp = 0; lp < L; ++lp) {
        for (Index kp = 0; kp < K; ++kp) {
          const Index v = user_index(lp, kp, K);
          if (v == u) continue;
          if (direction == Direction::Uplink) {
            s.b(u, v) = rho * std::norm(own.dot(channels(l, lp, kp)));
          } else {
            s.b(u, v) = rho * std::norm(processing[static_cast<std::size_t>(v)].dot(channels(lp, l, k)));
          }
        }
      }
      s.d(u) = direction == Direction::Uplink ? noise_var * own.squaredNorm() : noise_var;
    }
  }
  return s;
}

std::vector<SinrCoefficientSet> build_correlated_coefficients(
    const NetworkRealization& net, const NetworkConfig& cfg, CorrelationKind kind,
    const std::vector<Direction>& directions) {
  const auto tau_p = static_cast<double>(cfg.tau_p());
  const auto provider = make_correlation_provider(net, kind, cfg.asd, cfg.antennas);
  const auto stats = ew_mmse_stats(net.num_cells, net.users_per_cell, cfg.antennas, provider,
                                   net.pilots, cfg.rho_ul(), tau_p);
  std::vector<SinrCoefficientSet> out;
  for (Direction dir : directions) {
    out.push_back(dir == Direction::Uplink
                      ? ul_correlated(stats, cfg.rho_ul(), tau_p, net.pilots)
                      : dl_correlated(stats, cfg.rho_dl(), cfg.rho_ul(), tau_p, net.pilots));
  }
  return out;
}

std::vector<SinrCoefficientSet> build_coefficients(const NetworkRealization& net,
                                                   const NetworkConfig& cfg, FadingModel fading,
                                                   const std::vector<Direction>& directions) {
  if (fading == FadingModel::Correlated) {
    return build_correlated_coefficients(net, cfg, CorrelationKind::LocalScattering, directions);
  }
  const auto tau_p = static_cast<double>(cfg.tau_p());
  const auto gamma = mmse_gamma_array(net.beta, net.pilots, cfg.rho_ul(), tau_p);
  std::vector<SinrCoefficientSet> out;
  for (Direction dir : directions) {
    out.push_back(dir == Direction::Uplink
                      ? ul_uncorrelated(gamma, net.beta, cfg.antennas, cfg.rho_ul(), net.pilots)
                      : dl_uncorrelated(gamma, net.beta, cfg.antennas, cfg.rho_dl(), net.pilots));
  }
  return out;
}

CoefficientPair build_coefficients(const NetworkRealization& net, const NetworkConfig& cfg,
                                   FadingModel fading) {
  auto sets = build_coefficients(net, cfg, fading, {Direction::Uplink, Direction::Downlink});
  return {std::move(sets[0]), std::move(sets[1])};
}

}  // namespace mimopc
