#include "mimopc/fading_mc.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mimopc {

ProcessingRule mr_processing() {
  return [](const ChannelDraw& draw, Index bs, Index k) -> Eigen::VectorXcd {
    return draw.hhat[static_cast<std::size_t>(bs * draw.users_per_cell + k)];
  };
}

namespace {

// Running raw moments of a complex sample z, enough to recover the mean, the variance and
// standard errors of |mean|^2 and of the variance.
struct ComplexMoments {
  double zr = 0, zi = 0, a = 0, a2 = 0, zr2 = 0, zrzi = 0, zi2 = 0, azr = 0, azi = 0;

  void add(std::complex<double> z) {
    const double r = z.real();
    const double i = z.imag();
    const double m = r * r + i * i;
    zr += r;
    zi += i;
    a += m;
    a2 += m * m;
    zr2 += r * r;
    zrzi += r * i;
    zi2 += i * i;
    azr += m * r;
    azi += m * i;
  }
};

struct MomentSummary {
  double mean_sq;     // |E z|^2
  double variance;    // E|z - E z|^2
  double se_mean_sq;
  double se_variance;
};

MomentSummary summarize(const ComplexMoments& s, double n) {
  const double mr = s.zr / n;
  const double mi = s.zi / n;
  const double m2 = mr * mr + mi * mi;
  const double ea = s.a / n;
  const double var = std::max(0.0, ea - m2) * n / (n - 1);

  // B = Re(conj(m) z); the delta method gives var(|mean|^2) ~ 4 var(B) / n.
  const double eb2 = mr * mr * s.zr2 / n + 2 * mr * mi * s.zrzi / n + mi * mi * s.zi2 / n;
  const double var_b = std::max(0.0, eb2 - m2 * m2);
  const double eab = mr * s.azr / n + mi * s.azi / n;
  const double mu4 = s.a2 / n + 4 * eb2 + m2 * m2 - 4 * eab + 2 * ea * m2 - 4 * m2 * m2;

  MomentSummary out;
  out.mean_sq = m2;
  out.variance = var;
  out.se_mean_sq = std::sqrt(4 * var_b / n + (var / n) * (var / n));
  out.se_variance = std::sqrt(std::max(0.0, mu4 - var * var) / n);
  return out;
}

struct RealMoments {
  double s1 = 0, s2 = 0;
  void add(double x) {
    s1 += x;
    s2 += x * x;
  }
  double mean(double n) const { return s1 / n; }
  double se(double n) const {
    const double m = s1 / n;
    return std::sqrt(std::max(0.0, s2 / n - m * m) / n);
  }
};

double rel_quadrature(double value, double se_value, double base, double se_base) {
  // Standard error of value / base when both are estimated independently.
  if (base <= 0) return 0;
  const double ratio = value / base;
  const double rv = value > 0 ? se_value / value : 0.0;
  const double rb = se_base / base;
  if (value <= 0) return se_value / base;
  return std::abs(ratio) * std::sqrt(rv * rv + rb * rb);
}

}  // namespace

MonteCarloCoefficients general_fading_mc(const ChannelSampler& sampler,
                                         const ProcessingRule& rule, Index num_cells,
                                         Index users_per_cell, const PilotAssignment& pilots,
                                         double rho, double noise_var, Index n_samples,
                                         Direction direction, Rng& rng) {
  if (n_samples < 2) throw std::invalid_argument("at least 2 channel samples are required");
  if (noise_var < 0) throw std::invalid_argument("noise variance must be nonnegative");
  if (direction == Direction::Downlink && !(noise_var > 0)) {
    throw std::invalid_argument("downlink noise variance must be positive (d = noise)");
  }
  const Index L = num_cells;
  const Index K = users_per_cell;
  const Index N = L * K;

  // pair(u, v): z = v_u^H h^{bs(u)}_v, the signal of user v seen through user u's vector.
  std::vector<ComplexMoments> pair(static_cast<std::size_t>(N * N));
  std::vector<RealMoments> norm(static_cast<std::size_t>(N));
  std::vector<Eigen::VectorXcd> v(static_cast<std::size_t>(N));

  for (Index s = 0; s < n_samples; ++s) {
    const ChannelDraw draw = sampler(rng);
    for (Index l = 0; l < L; ++l) {
      for (Index k = 0; k < K; ++k) v[static_cast<std::size_t>(user_index(l, k, K))] = rule(draw, l, k);
    }
    for (Index u = 0; u < N; ++u) {
      const auto& vu = v[static_cast<std::size_t>(u)];
      const Index bs = u / K;
      norm[static_cast<std::size_t>(u)].add(vu.squaredNorm());
      for (Index w = 0; w < N; ++w) {
        pair[static_cast<std::size_t>(u * N + w)].add(
            vu.dot(draw.h[static_cast<std::size_t>(bs * N + w)]));
      }
    }
  }

  const auto n = static_cast<double>(n_samples);
  std::vector<MomentSummary> sum(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) sum[i] = summarize(pair[i], n);
  auto at = [&](Index u, Index w) -> const MomentSummary& {
    return sum[static_cast<std::size_t>(u * N + w)];
  };
  auto nmean = [&](Index u) { return norm[static_cast<std::size_t>(u)].mean(n); };
  auto nse = [&](Index u) { return norm[static_cast<std::size_t>(u)].se(n); };

  MonteCarloCoefficients out;
  auto& c = out.coeffs;
  c.direction = direction;
  c.num_cells = L;
  c.users_per_cell = K;
  c.pilots = pilots;
  c.a = Eigen::VectorXd::Zero(N);
  c.b = Eigen::MatrixXd::Zero(N, N);
  c.c = Eigen::MatrixXd::Zero(N, L);
  c.d = Eigen::VectorXd::Zero(N);
  out.se_a = Eigen::VectorXd::Zero(N);
  out.se_b = Eigen::MatrixXd::Zero(N, N);
  out.se_c = Eigen::MatrixXd::Zero(N, L);
  out.se_d = Eigen::VectorXd::Zero(N);

  for (Index l = 0; l < L; ++l) {
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      if (direction == Direction::Uplink) {
        c.a(u) = rho * at(u, u).mean_sq;
        out.se_a(u) = rho * at(u, u).se_mean_sq;
        for (Index w = 0; w < N; ++w) {
          c.b(u, w) = rho * at(u, w).variance;
          out.se_b(u, w) = rho * at(u, w).se_variance;
        }
        for (Index lp : pilots.sharing(l)) {
          if (lp == l) continue;
          const auto& m = at(u, user_index(lp, k, K));
          c.c(u, lp) = rho * m.mean_sq;
          out.se_c(u, lp) = rho * m.se_mean_sq;
        }
        c.d(u) = noise_var * nmean(u);
        out.se_d(u) = noise_var * nse(u);
      } else {
        const double nu = nmean(u);
        c.a(u) = rho * at(u, u).mean_sq / nu;
        out.se_a(u) = rho * rel_quadrature(at(u, u).mean_sq, at(u, u).se_mean_sq, nu, nse(u));
        for (Index w = 0; w < N; ++w) {
          // Precoder of user w (at its own BS) leaking onto user u.
          const auto& m = at(w, u);
          c.b(u, w) = rho * m.variance / nmean(w);
          out.se_b(u, w) = rho * rel_quadrature(m.variance, m.se_variance, nmean(w), nse(w));
        }
        for (Index lp : pilots.sharing(l)) {
          if (lp == l) continue;
          const Index w = user_index(lp, k, K);
          const auto& m = at(w, u);
          c.c(u, lp) = rho * m.mean_sq / nmean(w);
          out.se_c(u, lp) = rho * rel_quadrature(m.mean_sq, m.se_mean_sq, nmean(w), nse(w));
        }
        c.d(u) = noise_var;
      }
    }
  }
  return out;
}

EwMmseRayleighSampler::EwMmseRayleighSampler(Index num_cells, Index users_per_cell,
                                             Index antennas,
                                             const CorrelationProvider& correlation,
                                             const PilotAssignment& pilots, double rho_ul,
                                             double tau_p)
    : L_(num_cells), K_(users_per_cell), M_(antennas), pilots_(pilots), rho_(rho_ul),
      tau_(tau_p) {
  const Index N = L_ * K_;
  sqrt_r_.resize(static_cast<std::size_t>(L_ * N));
  gain_.resize(static_cast<std::size_t>(L_ * K_));
  std::vector<Eigen::VectorXd> diag(static_cast<std::size_t>(N));
  for (Index bs = 0; bs < L_; ++bs) {
    for (Index u = 0; u < N; ++u) {
      const Eigen::MatrixXcd R = correlation(bs, u / K_, u % K_);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(R);
      const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      sqrt_r_[static_cast<std::size_t>(bs * N + u)] =
          es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
      diag[static_cast<std::size_t>(u)] = R.diagonal().real();
    }
    for (Index k = 0; k < K_; ++k) {
      Eigen::VectorXd psi_inv_diag = Eigen::VectorXd::Ones(M_);
      for (Index j : pilots_.sharing(bs)) {
        psi_inv_diag += rho_ * tau_ * diag[static_cast<std::size_t>(user_index(j, k, K_))];
      }
      gain_[static_cast<std::size_t>(bs * K_ + k)] =
          std::sqrt(rho_) *
          diag[static_cast<std::size_t>(user_index(bs, k, K_))].cwiseQuotient(psi_inv_diag);
    }
  }
}

ChannelDraw EwMmseRayleighSampler::operator()(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto cn = [&](Index n) {
    Eigen::VectorXcd z(n);
    for (Index i = 0; i < n; ++i) z(i) = {normal(rng), normal(rng)};
    return z;
  };
  const Index N = L_ * K_;
  ChannelDraw draw;
  draw.num_cells = L_;
  draw.users_per_cell = K_;
  draw.h.resize(static_cast<std::size_t>(L_ * N));
  for (std::size_t i = 0; i < draw.h.size(); ++i) draw.h[i] = sqrt_r_[i] * cn(M_);
  draw.hhat.resize(static_cast<std::size_t>(L_ * K_));
  const double amp = std::sqrt(rho_) * tau_;
  for (Index bs = 0; bs < L_; ++bs) {
    for (Index k = 0; k < K_; ++k) {
      Eigen::VectorXcd y = std::sqrt(tau_) * cn(M_);
      for (Index j : pilots_.sharing(bs)) {
        y += amp * draw.h[static_cast<std::size_t>(bs * N + user_index(j, k, K_))];
      }
      draw.hhat[static_cast<std::size_t>(bs * K_ + k)] =
          gain_[static_cast<std::size_t>(bs * K_ + k)].asDiagonal() * y;
    }
  }
  return draw;
}

}  // namespace mimopc
