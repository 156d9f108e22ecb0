#include <doctest.h>

#include <cmath>
#include <random>

#include "mimopc/coefficients.hpp"
#include "mimopc/diagnostics.hpp"
#include "mimopc/geometry.hpp"
#include "mimopc/solver.hpp"

using namespace mimopc;

namespace {

constexpr Scheme kSchemes[] = {Scheme::GmPerCellMmf, Scheme::NetworkMmf, Scheme::NetworkPf};

NetworkConfig net_config(Index L, Index K, std::uint64_t seed, Index M = 32) {
  NetworkConfig cfg;
  cfg.num_cells = L;
  cfg.users_per_cell = K;
  cfg.antennas = M;
  cfg.seed = seed;
  return cfg;
}

SinrCoefficientSet instance(Index L, Index K, std::uint64_t seed, Direction dir,
                            FadingModel f = FadingModel::Uncorrelated) {
  const auto cfg = net_config(L, K, seed);
  return build_coefficients(realize_network(cfg, 0), cfg, f, {dir}).front();
}

SinrCoefficientSet scalar(double a, double b, double d, Direction dir = Direction::Uplink) {
  SinrCoefficientSet s;
  s.direction = dir;
  s.num_cells = 1;
  s.users_per_cell = 1;
  s.a = Eigen::VectorXd::Constant(1, a);
  s.b = Eigen::MatrixXd::Constant(1, 1, b);
  s.c = Eigen::MatrixXd::Zero(1, 1);
  s.d = Eigen::VectorXd::Constant(1, d);
  s.pilots = PilotAssignment::orthogonal(1);
  return s;
}

// First two cells of a one-user-per-cell network.
SinrCoefficientSet two_cells(std::uint64_t seed, Direction dir) {
  const auto c = instance(4, 1, seed, dir);
  SinrCoefficientSet s;
  s.direction = dir;
  s.num_cells = 2;
  s.users_per_cell = 1;
  s.a = c.a.head(2);
  s.b = c.b.topLeftCorner(2, 2);
  s.c = c.c.topLeftCorner(2, 2);
  s.d = c.d.head(2);
  s.pilots = PilotAssignment::full_reuse(2);
  return s;
}

double grid_best(const SinrCoefficientSet& s, const ConvexProblem& p, int steps) {
  double best = -INFINITY;
  const Index n = s.num_users();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd eta(n);
  while (true) {
    for (Index u = 0; u < n; ++u) eta(u) = static_cast<double>(idx[static_cast<std::size_t>(u)]) / steps;
    if (is_feasible_allocation(eta, s.direction, s.num_cells, s.users_per_cell, 1e-12)) {
      best = std::max(best, log_objective(p, evaluate_sinr(s, eta)));
    }
    Index u = 0;
    while (u < n && ++idx[static_cast<std::size_t>(u)] > steps) idx[static_cast<std::size_t>(u++)] = 0;
    if (u == n) break;
  }
  return best;
}

int count(const ConvexProblem& p, LseConstraint::Kind kind) {
  int n = 0;
  for (const auto& c : p.constraints) n += c.kind == kind;
  return n;
}

}  // namespace

TEST_CASE("link function limits and stability") {
  for (double eps : {1e-4, 1e-3, 1e-1}) {
    CHECK(concave_link(-700.0, eps).value == doctest::Approx(std::log(std::log2(1 + eps))));
    const auto hi = concave_link(700.0, eps);
    CHECK(std::isfinite(hi.value));
    CHECK(hi.value == doctest::Approx(std::log(700 / std::log(2.0))));
    CHECK(hi.first == doctest::Approx(1.0 / 700).epsilon(1e-6));
    CHECK(concave_link(-700.0, eps).first >= 0);
  }
}

TEST_CASE("link derivatives match central differences") {
  for (double x : {-5.0, 0.0, 5.0}) {
    const auto v = concave_link<long double>(x, 1e-3L);
    const auto fd = link_central_differences(x, 1e-3L);
    CHECK(std::abs(fd.first - v.first) <= 1e-6L * std::abs(v.first));
    CHECK(std::abs(fd.second - v.second) <= 1e-6L * link_second_scale(x, 1e-3L));
  }
}

TEST_CASE("link is concave to the right of its inflection point and convex far left") {
  for (double eps : {1e-4, 1e-3, 1e-1}) {
    const double knee = 0.5 * std::log(2 * eps);
    for (double x = knee + 1.0; x <= 30; x += 0.01) CHECK(concave_link(x, eps).second <= 0);
    CHECK(concave_link(knee - 3.0, eps).second > 0);
  }
}

TEST_CASE("problem sizes on two single-user cells") {
  const auto s = two_cells(1, Direction::Uplink);
  const auto gm = build_problem(s, Scheme::GmPerCellMmf);
  CHECK(gm.num_targets == 2);
  CHECK(gm.num_vars == 4);
  CHECK(count(gm, LseConstraint::Kind::Sinr) == 2);
  CHECK(count(gm, LseConstraint::Kind::Power) == 2);
  CHECK(build_problem(s, Scheme::NetworkMmf).num_targets == 1);
  const auto pf = build_problem(s, Scheme::NetworkPf);
  CHECK(pf.num_targets == 2);
  const Eigen::VectorXd g = pf.objective_gradient(pf.x0);
  CHECK(g.head(2).isApprox(Eigen::Vector2d::Ones()));
  CHECK(pf.objective_curvature(pf.x0).isZero());
  CHECK(count(build_problem(two_cells(1, Direction::Downlink), Scheme::GmPerCellMmf),
              LseConstraint::Kind::Power) == 2);
}

TEST_CASE("start point is strictly feasible") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 3, 3, dir, FadingModel::Correlated);
    for (Scheme sc : kSchemes) {
      const auto p = build_problem(s, sc);
      for (const auto& c : p.constraints) CHECK(c.value(p.x0) < 0);
    }
  }
}

TEST_CASE("single user: full power for every scheme") {
  const auto s = scalar(3.0, 0.5, 1.5);
  for (Scheme sc : kSchemes) {
    const auto out = solve(s, sc);
    CHECK(out.status == SolveStatus::Optimal);
    CHECK(out.eta(0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(out.sinr(0) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(out.kkt_residual <= 1e-6);
  }
  const auto bis = bisection_nwmmf(s);
  CHECK(bis.target == doctest::Approx(1.5).epsilon(1e-8));
}

TEST_CASE("grid oracle: two single-user cells, both directions") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
      const auto s = two_cells(seed, dir);
      for (Scheme sc : kSchemes) {
        const auto p = build_problem(s, sc);
        const auto out = solve(p);
        CHECK(out.status == SolveStatus::Optimal);
        CHECK(log_objective(p, evaluate_sinr(s, out.eta)) >= grid_best(s, p, 200) - 1e-3);
      }
    }
  }
}

TEST_CASE("grid oracle: four users") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 1, 9, dir);
    const auto s22 = instance(1, 4, 10, dir);
    for (const auto* inst : {&s, &s22}) {
      for (Scheme sc : kSchemes) {
        const auto p = build_problem(*inst, sc);
        const auto out = solve(p);
        CHECK(log_objective(p, evaluate_sinr(*inst, out.eta)) >= grid_best(*inst, p, 20) - 1e-3);
      }
    }
  }
}

TEST_CASE("single cell: per-cell and network max-min coincide") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(1, 5, 12, dir, FadingModel::Correlated);
    const auto gm = solve(s, Scheme::GmPerCellMmf);
    const auto mmf = solve(s, Scheme::NetworkMmf);
    CHECK(((gm.sinr - mmf.sinr).array().abs() / mmf.sinr.array()).maxCoeff() <= 1e-6);
  }
}

TEST_CASE("bisection agrees with the unified solver") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto s = instance(4, 2, seed, Direction::Uplink);
    const auto out = solve(s, Scheme::NetworkMmf);
    const auto bis = bisection_nwmmf(s);
    CHECK(std::abs(out.sinr.minCoeff() - bis.min_sinr) <= 1e-5 * bis.min_sinr);
    CHECK(bis.min_sinr >= bis.target * (1 - 1e-9));
  }
  const auto dl = instance(4, 2, 30, Direction::Downlink, FadingModel::Correlated);
  const auto bis = bisection_nwmmf(dl);
  CHECK(is_feasible_allocation(bis.eta, Direction::Downlink, 4, 2, 1e-9));
  CHECK(std::abs(solve(dl, Scheme::NetworkMmf).sinr.minCoeff() - bis.min_sinr) <= 1e-5 * bis.min_sinr);
}

TEST_CASE("bisection: symmetric users get equal powers") {
  SinrCoefficientSet s;
  s.direction = Direction::Uplink;
  s.num_cells = 1;
  s.users_per_cell = 2;
  s.a = Eigen::Vector2d(5, 5);
  s.b = Eigen::Matrix2d::Constant(0.7);
  s.c = Eigen::MatrixXd::Zero(2, 1);
  s.d = Eigen::Vector2d(1, 1);
  s.pilots = PilotAssignment::orthogonal(1);
  const auto bis = bisection_nwmmf(s);
  CHECK(bis.eta(0) == doctest::Approx(bis.eta(1)));
  s.a(1) = 0;
  CHECK_THROWS_AS(bisection_nwmmf(s), std::invalid_argument);
}

TEST_CASE("solutions are certified and consistent") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 3, 14, dir, FadingModel::Correlated);
    for (Scheme sc : kSchemes) {
      const auto p = build_problem(s, sc);
      const auto out = solve(p);
      INFO(to_string(sc), " ", to_string(dir));
      CHECK(out.status == SolveStatus::Optimal);
      CHECK(out.constraint_violation <= 1e-8);
      CHECK(verify_kkt(p, out).max_residual <= 1e-6);
      CHECK(is_feasible_allocation(out.eta, dir, 4, 3, 1e-8));
      CHECK(((out.sinr - evaluate_sinr(s, out.eta)).array().abs() / out.sinr.array()).maxCoeff() <= 1e-9);
      CHECK((out.sinr.array() >= out.targets.array() * (1 - 1e-6)).all());
    }
  }
}

TEST_CASE("KKT residual is large away from the optimum") {
  const auto s = instance(4, 2, 15, Direction::Uplink);
  const auto p = build_problem(s, Scheme::GmPerCellMmf);
  auto out = solve(p);
  out.x.tail(p.num_vars - p.num_targets).array() -= 1.0;
  CHECK(verify_kkt(p, out).max_residual > 1e-2);
}

TEST_CASE("per-cell targets are tight at the optimum") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 3, 16, dir);
    const auto gm = solve(s, Scheme::GmPerCellMmf);
    for (Index l = 0; l < 4; ++l) {
      const double t = gm.targets(l * 3);
      CHECK(std::abs(gm.sinr.segment(l * 3, 3).minCoeff() - t) <= 1e-6 * t);
    }
    const auto mmf = solve(s, Scheme::NetworkMmf);
    CHECK(std::abs(mmf.sinr.minCoeff() - mmf.targets(0)) <= 1e-6 * mmf.targets(0));
    CHECK(mmf.sinr.maxCoeff() - mmf.sinr.minCoeff() <= 1e-6 * mmf.targets(0));
  }
}

TEST_CASE("a cell with vanishing gains does not zero the per-cell objective") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    auto s = instance(4, 2, 17, dir);
    s.a.segment(2, 2).setConstant(1e-30);
    const auto gm = solve(s, Scheme::GmPerCellMmf);
    CHECK(gm.status == SolveStatus::Optimal);
    for (Index l : {0, 2, 3}) CHECK(gm.targets(l * 2) > 0);
    const auto full = evaluate_sinr(s, full_power_allocation(dir, 4, 2));
    CHECK(gm.log_objective >= log_objective(build_problem(s, Scheme::GmPerCellMmf), full) - 1e-9);
  }
}

TEST_CASE("dead users: network schemes collapse, the per-cell scheme drops the cell") {
  auto s = instance(4, 2, 18, Direction::Uplink);
  s.a(3) = 0;
  for (Scheme sc : {Scheme::NetworkMmf, Scheme::NetworkPf}) {
    const auto out = solve(s, sc);
    CHECK(out.eta.isZero());
    CHECK(out.sinr.isZero());
  }
  const auto gm = solve(s, Scheme::GmPerCellMmf);
  CHECK(gm.eta.segment(2, 2).isZero());
  CHECK(gm.targets(2) == 0);
  CHECK(gm.targets(0) > 0);
}

TEST_CASE("network max-min is bounded by the best single-user ratio") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 2, 19, dir, FadingModel::Correlated);
    const auto mmf = solve(s, Scheme::NetworkMmf);
    CHECK(mmf.sinr.minCoeff() <= s.a.cwiseQuotient(s.d).minCoeff() * (1 + 1e-9));
  }
  double previous = INFINITY;
  for (double scale : {1.0, 1e-4, 1e-8, 1e-12}) {
    auto cfg = net_config(4, 2, 20);
    auto net = realize_network(cfg, 0);
    for (Index j = 0; j < 4; ++j) net.beta(j, 0, 0) *= scale;
    const auto s = build_coefficients(net, cfg, FadingModel::Uncorrelated, {Direction::Uplink}).front();
    const double v = solve(s, Scheme::NetworkMmf).sinr.minCoeff();
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("optimal SINRs are invariant to a common scaling of the coefficients") {
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 2, 22, dir, FadingModel::Correlated);
    auto t = s;
    const double kappa = 37.5;
    t.a *= kappa;
    t.b *= kappa;
    t.c *= kappa;
    t.d *= kappa;
    for (Scheme sc : kSchemes) {
      const auto x = solve(s, sc).sinr;
      const auto y = solve(t, sc).sinr;
      CHECK(((x - y).array().abs() / x.array()).maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("invalid coefficients are rejected") {
  auto s = scalar(1, 1, 0);
  CHECK_THROWS_AS(build_problem(s, Scheme::NetworkMmf), std::invalid_argument);
}
