#include <doctest.h>

#include <cmath>
#include <random>

#include "mimopc/geometry.hpp"

using namespace mimopc;

namespace {

NetworkConfig grid(Index L) {
  NetworkConfig cfg;
  cfg.num_cells = L;
  return cfg;
}

// 4-neighbourhood on the wrapped side x side grid.
bool torus_adjacent(Index a, Index b, Index side) {
  const Index ra = a / side, ca = a % side, rb = b / side, cb = b % side;
  const Index dr = std::min((ra - rb + side) % side, (rb - ra + side) % side);
  const Index dc = std::min((ca - cb + side) % side, (cb - ca + side) % side);
  return dr + dc == 1;
}

}  // namespace

TEST_CASE("layout of a 4x4 grid") {
  const auto bs = build_layout(grid(16));
  REQUIRE(bs.size() == 16);
  CHECK(bs[0].x() == doctest::Approx(125));
  CHECK(bs[0].y() == doctest::Approx(125));
  CHECK(bs[1].x() - bs[0].x() == doctest::Approx(250));
  CHECK(bs[4].y() - bs[0].y() == doctest::Approx(250));
}

TEST_CASE("layout of one and four cells") {
  const auto one = build_layout(grid(1));
  REQUIRE(one.size() == 1);
  CHECK(one[0].isApprox(Point(500, 500)));

  const auto four = build_layout(grid(4));
  REQUIRE(four.size() == 4);
  CHECK(four[0].isApprox(Point(250, 250)));
  CHECK(four[1].isApprox(Point(750, 250)));
  CHECK(four[2].isApprox(Point(250, 750)));
  CHECK(four[3].isApprox(Point(750, 750)));
}

TEST_CASE("layout rejects a non-square cell count") {
  CHECK_THROWS_AS(build_layout(grid(5)), ConfigError);
}

TEST_CASE("wrap distance examples") {
  CHECK(wrap_distance({10, 500}, {990, 500}, 1000) == doctest::Approx(20));
  CHECK(wrap_distance({3, 4}, {3, 4}, 1000) == 0.0);
  CHECK(wrap_distance({0, 0}, {500, 500}, 1000) == doctest::Approx(500 * std::sqrt(2.0)));
}

TEST_CASE("wrap distance properties on random pairs") {
  Rng rng(3);
  std::uniform_real_distribution<double> U(0, 1000);
  for (int i = 0; i < 2000; ++i) {
    const Point p(U(rng), U(rng)), q(U(rng), U(rng));
    const double d = wrap_distance(p, q, 1000);
    CHECK(d == doctest::Approx(wrap_distance(q, p, 1000)));
    CHECK(d <= (p - q).norm() + 1e-9);
    CHECK(d <= 1000 * std::sqrt(2.0) / 2 + 1e-9);
  }
}

TEST_CASE("large-scale fading values") {
  CHECK(large_scale_fading(1, 0) == doctest::Approx(std::pow(10.0, -3.5)).epsilon(1e-12));
  CHECK(large_scale_fading(100, 0) == doctest::Approx(std::pow(10.0, -10.84)).epsilon(1e-12));
  CHECK(large_scale_fading(100, 7) == doctest::Approx(std::pow(10.0, -10.14)).epsilon(1e-12));
  // Clamped below 1 m.
  CHECK(large_scale_fading(0.01, 0) == large_scale_fading(1, 0));
}

TEST_CASE("pilot group sizes") {
  const auto f1 = pilot_groups(16, 1);
  const auto f2 = pilot_groups(16, 2);
  const auto f4 = pilot_groups(16, 4);
  for (Index l = 0; l < 16; ++l) {
    CHECK(f1.sharing(l).size() == 16);
    CHECK(f2.sharing(l).size() == 8);
    CHECK(f4.sharing(l).size() == 4);
  }
}

TEST_CASE("same-group cells are never adjacent on the torus") {
  for (int f : {2, 4}) {
    const auto p = pilot_groups(16, f);
    for (Index a = 0; a < 16; ++a) {
      for (Index b = 0; b < 16; ++b) {
        if (a != b && torus_adjacent(a, b, 4)) CHECK_FALSE(p.share(a, b));
      }
    }
  }
}

TEST_CASE("pilot sharing is an equivalence relation containing the cell itself") {
  const auto p = pilot_groups(16, 4);
  for (Index l = 0; l < 16; ++l) {
    const auto& s = p.sharing(l);
    CHECK(std::find(s.begin(), s.end(), l) != s.end());
    for (Index m : s) CHECK(p.group_of(m) == p.group_of(l));
  }
}

TEST_CASE("invalid reuse factors") {
  CHECK_THROWS_AS(pilot_groups(16, 3), ConfigError);
  CHECK_THROWS_AS(pilot_groups(9, 2), ConfigError);
}

TEST_CASE("drops: positive fading and home-BS dominance") {
  NetworkConfig cfg;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto net = realize_network(cfg, i);
    for (Index l = 0; l < cfg.num_cells; ++l) {
      for (Index k = 0; k < cfg.users_per_cell; ++k) {
        for (Index j = 0; j < cfg.num_cells; ++j) {
          CHECK(net.beta(j, l, k) > 0);
          CHECK(net.beta(l, l, k) >= net.beta(j, l, k));
        }
      }
    }
  }
}

TEST_CASE("users are dropped inside their own cell square") {
  NetworkConfig cfg;
  const auto net = realize_network(cfg, 2);
  const double half = cfg.area_side / 4 / 2;
  for (Index l = 0; l < cfg.num_cells; ++l) {
    for (Index k = 0; k < cfg.users_per_cell; ++k) {
      const Point off = net.user_positions[static_cast<std::size_t>(user_index(l, k, 5))] -
                        net.bs_positions[static_cast<std::size_t>(l)];
      CHECK(off.cwiseAbs().maxCoeff() <= half + 1e-9);
    }
  }
}

TEST_CASE("single cell drop") {
  NetworkConfig cfg = grid(1);
  cfg.users_per_cell = 3;
  const auto net = realize_network(cfg, 0);
  CHECK(net.beta.num_cells() == 1);
  for (Index k = 0; k < 3; ++k) CHECK(net.beta(0, 0, k) > 0);
}

TEST_CASE("realizations are deterministic in (seed, drop index)") {
  NetworkConfig cfg;
  cfg.seed = 42;
  const auto a = realize_network(cfg, 7);
  const auto b = realize_network(cfg, 7);
  const auto c = realize_network(cfg, 8);
  bool differs = false;
  for (Index j = 0; j < 16; ++j) {
    for (Index l = 0; l < 16; ++l) {
      for (Index k = 0; k < 5; ++k) {
        CHECK(a.beta(j, l, k) == b.beta(j, l, k));
        CHECK(a.aoa(j, l, k) == b.aoa(j, l, k));
        differs = differs || a.beta(j, l, k) != c.beta(j, l, k);
      }
    }
  }
  CHECK(differs);
  CHECK(drop_seed(42, 7) != drop_seed(42, 8));
  CHECK(drop_seed(42, 7) != drop_seed(43, 7));
}

TEST_CASE("config validation") {
  NetworkConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.tau_p() == 5);
  CHECK(cfg.tau_u() == 97);
  CHECK(cfg.tau_d() == 97);
  cfg.num_cells = 15;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NetworkConfig{};
  cfg.epsilon = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NetworkConfig{};
  cfg.ul_data = 150;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = NetworkConfig{};
  cfg.shadow_std = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
