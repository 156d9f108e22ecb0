#include "selftest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "mimopc/coefficients.hpp"
#include "mimopc/diagnostics.hpp"
#include "mimopc/estimation.hpp"
#include "mimopc/geometry.hpp"
#include "mimopc/heuristic.hpp"
#include "mimopc/solver.hpp"

namespace mimopc {

namespace {

NetworkConfig small_config() {
  NetworkConfig cfg;
  cfg.num_cells = 4;
  cfg.users_per_cell = 2;
  cfg.antennas = 16;
  cfg.seed = 11;
  return cfg;
}

double max_rel_diff(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double m = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    m = std::max(m, std::abs(x(i) - y(i)) / std::max(std::abs(y(i)), 1e-300));
  }
  return m;
}

struct Check {
  std::string name;
  std::function<std::string()> run;  // empty string on success, else a diagnostic
};

std::string link_derivatives() {
  for (double eps : {1e-4, 1e-3, 1e-1}) {
    for (int i = 0; i <= 600; ++i) {
      const long double x = -30.0L + 0.1L * i;
      const auto c = concave_link<long double>(x, eps);
      const auto fd = link_central_differences(x, eps);
      if (std::abs(fd.first - c.first) > 1e-6L * std::abs(c.first)) {
        return "f' mismatch at x=" + std::to_string(static_cast<double>(x));
      }
      if (std::abs(fd.second - c.second) > 1e-6L * link_second_scale(x, eps)) {
        return "f'' mismatch at x=" + std::to_string(static_cast<double>(x));
      }
    }
  }
  return {};
}

std::string concave_right_of_origin() {
  for (double eps : {1e-4, 1e-3, 1e-1}) {
    for (int i = 0; i <= 3000; ++i) {
      const double x = 0.01 * i;
      if (concave_link(x, eps).second > 0) return "f'' > 0 at x=" + std::to_string(x);
    }
  }
  return {};
}

}  // namespace

int run_selftest(std::ostream& os, bool perturb) {
  const double bump = perturb ? 1.01 : 1.0;
  auto tamper = [&](SinrCoefficientSet c) {
    c.a *= bump;
    return c;
  };
  const NetworkConfig cfg = small_config();

  std::vector<Check> checks;
  checks.push_back({"link-derivatives", link_derivatives});
  checks.push_back({"link-concave-for-positive-x", concave_right_of_origin});

  checks.push_back({"identity-correlation-reduction", [&]() -> std::string {
    const auto net = realize_network(cfg, 0);
    const std::vector<Direction> dirs{Direction::Uplink, Direction::Downlink};
    const auto corr = build_correlated_coefficients(net, cfg, CorrelationKind::ScaledIdentity, dirs);
    const auto unc = build_coefficients(net, cfg, FadingModel::Uncorrelated, dirs);
    Rng rng(5);
    std::uniform_real_distribution<double> U(0.05, 1.0);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      Eigen::VectorXd eta(cfg.num_cells * cfg.users_per_cell);
      for (Index u = 0; u < eta.size(); ++u) eta(u) = U(rng) / (i == 0 ? 1.0 : cfg.users_per_cell);
      const double e = max_rel_diff(evaluate_sinr(tamper(corr[i]), eta), evaluate_sinr(unc[i], eta));
      if (e > 1e-9) return "relative SINR mismatch " + std::to_string(e);
    }
    return {};
  }});

  checks.push_back({"single-user-optimum", [&]() -> std::string {
    SinrCoefficientSet c;
    c.direction = Direction::Uplink;
    c.num_cells = 1;
    c.users_per_cell = 1;
    c.a = Eigen::VectorXd::Constant(1, 3.0);
    c.b = Eigen::MatrixXd::Constant(1, 1, 0.5);
    c.c = Eigen::MatrixXd::Zero(1, 1);
    c.d = Eigen::VectorXd::Constant(1, 1.5);
    c.pilots = PilotAssignment::orthogonal(1);
    const auto out = solve(tamper(c), Scheme::NetworkMmf);
    const double expected = 3.0 / (0.5 + 1.5);
    if (std::abs(out.targets(0) - expected) > 1e-6 * expected) {
      return "target " + std::to_string(out.targets(0)) + " != " + std::to_string(expected);
    }
    if (out.kkt_residual > 1e-6) return "KKT residual " + std::to_string(out.kkt_residual);
    return {};
  }});

  checks.push_back({"bisection-agreement", [&]() -> std::string {
    const auto net = realize_network(cfg, 1);
    for (const auto& c : build_coefficients(net, cfg, FadingModel::Uncorrelated,
                                            {Direction::Uplink, Direction::Downlink})) {
      const auto out = solve(tamper(c), Scheme::NetworkMmf, cfg.epsilon);
      const auto bis = bisection_nwmmf(c);
      const double e = std::abs(out.sinr.minCoeff() - bis.min_sinr) / bis.min_sinr;
      if (e > 1e-5) return "min SINR differs by " + std::to_string(e);
    }
    return {};
  }});

  checks.push_back({"two-user-grid-oracle", [&]() -> std::string {
    NetworkConfig c2 = cfg;
    c2.num_cells = 4;
    c2.users_per_cell = 1;
    const auto net = realize_network(c2, 2);
    auto c = build_coefficients(net, c2, FadingModel::Uncorrelated, {Direction::Uplink}).front();
    // Restrict to the first two cells.
    SinrCoefficientSet s;
    s.direction = Direction::Uplink;
    s.num_cells = 2;
    s.users_per_cell = 1;
    s.a = c.a.head(2);
    s.b = c.b.topLeftCorner(2, 2);
    s.c = c.c.topLeftCorner(2, 2);
    s.d = c.d.head(2);
    s.pilots = PilotAssignment::full_reuse(2);
    for (Scheme scheme : {Scheme::GmPerCellMmf, Scheme::NetworkMmf, Scheme::NetworkPf}) {
      const auto problem = build_problem(s, scheme);
      double best = -INFINITY;
      Eigen::VectorXd eta(2);
      for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100; ++j) {
          eta << 0.01 * i, 0.01 * j;
          best = std::max(best, log_objective(problem, evaluate_sinr(s, eta)));
        }
      }
      const auto out = solve(tamper(s), scheme);
      const double achieved = log_objective(problem, evaluate_sinr(s, out.eta));
      if (achieved < best - 1e-3) {
        return std::string(to_string(scheme)) + " below grid optimum by " +
               std::to_string(best - achieved);
      }
    }
    return {};
  }});

  checks.push_back({"reported-sinr-consistency", [&]() -> std::string {
    const auto net = realize_network(cfg, 3);
    for (const auto& c : build_coefficients(net, cfg, FadingModel::Correlated,
                                            {Direction::Uplink, Direction::Downlink})) {
      for (Scheme scheme : {Scheme::GmPerCellMmf, Scheme::NetworkMmf, Scheme::NetworkPf}) {
        const auto out = solve(tamper(c), scheme, cfg.epsilon);
        if (out.status != SolveStatus::Optimal) return "solver status " + std::string(to_string(out.status));
        const double e = max_rel_diff(out.sinr, evaluate_sinr(c, out.eta));
        if (e > 1e-9) return std::string(to_string(scheme)) + " SINR mismatch " + std::to_string(e);
        if (out.kkt_residual > 1e-6) return "KKT residual " + std::to_string(out.kkt_residual);
      }
    }
    return {};
  }});

  checks.push_back({"heuristic-domination", [&]() -> std::string {
    const auto net = realize_network(cfg, 4);
    for (const auto& c : build_coefficients(net, cfg, FadingModel::Uncorrelated,
                                            {Direction::Uplink, Direction::Downlink})) {
      const auto h = approx_percell(c);
      if (!is_feasible_allocation(h.eta, c.direction, c.num_cells, c.users_per_cell, 1e-12)) {
        return "heuristic allocation infeasible";
      }
      const auto gm = solve(c, Scheme::GmPerCellMmf, cfg.epsilon);
      if (gm_log_objective(h.cell_min_sinr, cfg.epsilon) > gm.log_objective + 1e-6) {
        return "heuristic beats the GM optimum";
      }
    }
    return {};
  }});

  int failures = 0;
  for (const auto& check : checks) {
    std::string msg;
    try {
      msg = check.run();
    } catch (const std::exception& e) {
      msg = std::string("exception: ") + e.what();
    }
    if (msg.empty()) {
      os << "PASS " << check.name << '\n';
    } else {
      os << "FAIL " << check.name << ": " << msg << '\n';
      ++failures;
    }
  }
  os << (failures == 0 ? "selftest passed" : "selftest failed: " + std::to_string(failures) + " check(s)")
     << '\n';
  return failures;
}

}  // namespace mimopc
