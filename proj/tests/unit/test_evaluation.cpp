#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mimopc/evaluation.hpp"

using namespace mimopc;

namespace {

NetworkConfig small(std::uint64_t seed = 3) {
  NetworkConfig cfg;
  cfg.num_cells = 4;
  cfg.users_per_cell = 2;
  cfg.antennas = 16;
  cfg.seed = seed;
  return cfg;
}

ExperimentOptions opts(Index drops, unsigned threads, FadingModel f = FadingModel::Uncorrelated) {
  ExperimentOptions o;
  o.drops = drops;
  o.threads = threads;
  o.fading = f;
  return o;
}

}  // namespace

TEST_CASE("spectral efficiency examples") {
  CHECK(spectral_efficiency(1.0, 200, 5, 97, 97, Direction::Uplink) == doctest::Approx(0.49));
  CHECK(spectral_efficiency(1.0, 200, 5, 97, 97, Direction::Downlink) == doctest::Approx(0.49));
  CHECK(spectral_efficiency(0.0, 200, 5, 97, 97, Direction::Uplink) == 0.0);
  CHECK(spectral_efficiency(1e6, 200, 5, 0, 195, Direction::Uplink) == doctest::Approx(0.0));
  CHECK_THROWS_AS(spectral_efficiency(1.0, 200, 5, 97, 197, Direction::Uplink), std::invalid_argument);
  CHECK(spectral_efficiency(3.0, small(), Direction::Uplink) == doctest::Approx(0.495 * 2));
}

TEST_CASE("quantiles interpolate linearly") {
  const std::vector<double> v{4, 1, 3, 2};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 4.0);
  CHECK(quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(v, 1.0 / 3) == doctest::Approx(2.0));
  double prev = -INFINITY;
  for (double q = 0; q <= 1.0; q += 0.01) {
    const double x = quantile(v, q);
    CHECK(x >= prev);
    prev = x;
  }
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(quantile(v, 1.5), std::invalid_argument);
}

TEST_CASE("empirical CDF") {
  const auto e = ecdf({3.0, 1.0, 2.0, 2.0});
  REQUIRE(e.x.size() == 4);
  CHECK(std::is_sorted(e.x.begin(), e.x.end()));
  CHECK(std::is_sorted(e.p.begin(), e.p.end()));
  CHECK(e.p.front() > 0);
  CHECK(e.p.back() == 1.0);
}

TEST_CASE("policy names") {
  CHECK(parse_policy("GM") == Policy::Gm);
  CHECK(parse_policy("nw-mmf") == Policy::NwMmf);
  CHECK(parse_policy_list("gm,nwpf,gm") == std::vector<Policy>{Policy::Gm, Policy::NwPf});
  CHECK_THROWS_AS(parse_policy("best"), std::invalid_argument);
}

TEST_CASE("experiments are deterministic and independent of the thread count") {
  const auto cfg = small();
  const auto a = run_experiment(cfg, opts(3, 1));
  const auto b = run_experiment(cfg, opts(3, 3));
  REQUIRE(a.drops.size() == b.drops.size());
  for (std::size_t i = 0; i < a.drops.size(); ++i) {
    CHECK(a.drops[i].seed == b.drops[i].seed);
    for (std::size_t j = 0; j < a.drops[i].results.size(); ++j) {
      CHECK(a.drops[i].results[j].se == b.drops[i].results[j].se);
      CHECK(a.drops[i].results[j].eta == b.drops[i].results[j].eta);
    }
  }
  for (std::size_t s = 0; s < a.series.size(); ++s) {
    CHECK(a.series[s].sum_se == b.series[s].sum_se);
    CHECK(a.series[s].p5_sum_se == b.series[s].p5_sum_se);
  }
}

TEST_CASE("per-drop properties of the optimal schemes") {
  const auto cfg = small(5);
  const auto res = run_experiment(cfg, opts(2, 1, FadingModel::Correlated));
  for (const auto& drop : res.drops) {
    for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
      const auto& mmf = drop.get(Policy::NwMmf, dir);
      CHECK((mmf.se.maxCoeff() - mmf.se.minCoeff()) <= 1e-5 * mmf.se.minCoeff());
      const auto& gm = drop.get(Policy::Gm, dir);
      for (Index l = 0; l < 4; ++l) {
        const auto cell = gm.se.segment(l * 2, 2);
        CHECK((cell.maxCoeff() - cell.minCoeff()) <= 1e-5 * cell.minCoeff());
      }
      for (const auto& r : drop.results) {
        CHECK((r.se.array() >= 0).all());
        CHECK(std::abs(r.sum_se - r.se.sum()) <= 1e-9 * std::max(1.0, r.sum_se));
      }
    }
    for (const auto& d : drop.domination) CHECK(d.holds());
  }
}

TEST_CASE("series statistics are ordered by level") {
  const auto res = run_experiment(small(6), opts(4, 0));
  for (const auto& s : res.series) {
    CHECK(s.sum_se.size() == 4);
    CHECK(s.user_se.size() == 4 * 8);
    CHECK(s.p5_sum_se <= s.median_sum_se);
    CHECK(s.p2_user_se <= quantile(s.user_se, 0.5));
  }
}

TEST_CASE("zero power budget gives zero spectral efficiency") {
  auto cfg = small(7);
  cfg.ul_power_budget = 0;
  cfg.dl_power_budget = 0;
  const auto res = run_experiment(cfg, opts(1, 1));
  for (const auto& r : res.drops[0].results) CHECK(r.se.isZero());
}

TEST_CASE("realization hook is applied") {
  const auto cfg = small(8);
  ExperimentOptions o = opts(1, 1);
  o.policies = {Policy::Gm};
  o.directions = {Direction::Uplink};
  const auto base = run_experiment(cfg, o);
  const auto hooked = run_experiment(cfg, o, [](NetworkRealization& net) {
    for (Index j = 0; j < net.num_cells; ++j) net.beta(j, 1, 0) *= 1e-3;
  });
  CHECK(hooked.drops[0].results[0].se(2) < base.drops[0].results[0].se(2));
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
  std::vector<int> hits(10, 0);
  try {
    parallel_for(10, 4, [&](Index i) {
      hits[static_cast<std::size_t>(i)] = 1;
      if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "3");
  }
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("scalability sweep at desk scale") {
  auto cfg = small(9);
  const auto rows = scalability_sweep(cfg, {0.0, -60.0, -140.0}, FadingModel::Uncorrelated,
                                      Direction::Uplink);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.nwmmf_min_se <= r.user_a_full_power_se * (1 + 1e-9));
    CHECK(r.gm_other_cells_sum_se <= r.gm_sum_se + 1e-12);
  }
  CHECK(rows[2].nwmmf_sum_se < 1e-2);
  CHECK(rows[2].gm_other_cells_sum_se >= 0.9 * rows[2].gm_without_cell_sum_se);
}

TEST_CASE("power budget sweep: median NW-PF sum SE grows with the budget") {
  auto cfg = small(10);
  ExperimentOptions o = opts(3, 0);
  o.policies = {Policy::NwPf, Policy::Gm};
  const auto rows = power_budget_sweep(cfg, {0.01, 0.1, 1.0}, {1.0, 10.0, 80.0}, o);
  CHECK(rows.size() == 2 * 3 * 2);
  for (Direction dir : {Direction::Uplink, Direction::Downlink}) {
    double prev = -1;
    for (const auto& r : rows) {
      if (r.direction != dir || r.policy != Policy::NwPf) continue;
      CHECK(r.median_sum_se >= prev);
      prev = r.median_sum_se;
    }
  }
}
