#include "mimopc/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mimopc {

std::vector<Point> build_layout(const NetworkConfig& cfg) {
  const Index side = cfg.grid_side();
  if (side * side != cfg.num_cells || cfg.num_cells < 1) {
    throw ConfigError("num_cells must be a perfect square");
  }
  const double spacing = cfg.area_side / static_cast<double>(side);
  std::vector<Point> bs;
  bs.reserve(static_cast<std::size_t>(cfg.num_cells));
  for (Index row = 0; row < side; ++row) {
    for (Index col = 0; col < side; ++col) {
      bs.emplace_back((static_cast<double>(col) + 0.5) * spacing,
                      (static_cast<double>(row) + 0.5) * spacing);
    }
  }
  return bs;
}

Point wrap_offset(const Point& p, const Point& q, double area_side) {
  Point best = q - p;
  double best_norm = best.squaredNorm();
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      const Point cand = q + Point(dx * area_side, dy * area_side) - p;
      const double n = cand.squaredNorm();
      if (n < best_norm) {
        best_norm = n;
        best = cand;
      }
    }
  }
  return best;
}

double wrap_distance(const Point& p, const Point& q, double area_side) {
  return wrap_offset(p, q, area_side).norm();
}

double large_scale_fading(double distance_m, double shadow_db, double intercept_db,
                          double exponent_coeff_db) {
  const double d = std::max(distance_m, 1.0);
  const double db = intercept_db - exponent_coeff_db * std::log10(d) + shadow_db;
  return std::pow(10.0, db / 10.0);
}

PilotAssignment pilot_groups(Index num_cells, int reuse) {
  const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(num_cells))));
  if (side * side != num_cells) throw ConfigError("num_cells must be a perfect square");
  if (reuse == 1) return PilotAssignment::full_reuse(num_cells);
  if (reuse != 2 && reuse != 4) throw ConfigError("pilot reuse must be 1, 2 or 4");
  // Both patterns need an even grid side to stay consistent across the wrap-around.
  if (side % 2 != 0) {
    throw ConfigError("pilot reuse " + std::to_string(reuse) + " needs an even grid side");
  }
  std::vector<int> group(static_cast<std::size_t>(num_cells));
  for (Index row = 0; row < side; ++row) {
    for (Index col = 0; col < side; ++col) {
      const auto l = static_cast<std::size_t>(row * side + col);
      group[l] = reuse == 2 ? static_cast<int>((row + col) % 2)
                            : static_cast<int>((col % 2) + 2 * (row % 2));
    }
  }
  return PilotAssignment(std::move(group));
}

NetworkRealization drop_users(const NetworkConfig& cfg, const std::vector<Point>& bs_positions,
                              Rng& rng) {
  cfg.validate();
  const Index L = cfg.num_cells;
  const Index K = cfg.users_per_cell;
  if (static_cast<Index>(bs_positions.size()) != L) {
    throw std::invalid_argument("bs_positions size does not match num_cells");
  }
  const double cell_side = cfg.area_side / static_cast<double>(cfg.grid_side());

  NetworkRealization net;
  net.num_cells = L;
  net.users_per_cell = K;
  net.area_side = cfg.area_side;
  net.bs_positions = bs_positions;
  net.user_positions.resize(static_cast<std::size_t>(L * K));
  net.beta = LinkArray<double>(L, K);
  net.aoa = LinkArray<double>(L, K);
  net.pilots = pilot_groups(L, cfg.pilot_reuse);

  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::normal_distribution<double> shadow(0.0, cfg.shadow_std);
  std::vector<double> distance(static_cast<std::size_t>(L));
  std::vector<double> beta(static_cast<std::size_t>(L));

  for (Index l = 0; l < L; ++l) {
    const Point& home = bs_positions[static_cast<std::size_t>(l)];
    for (Index k = 0; k < K; ++k) {
      const Point pos = home + cell_side * Point(unit(rng), unit(rng));
      net.user_positions[static_cast<std::size_t>(user_index(l, k, K))] = pos;
      for (Index j = 0; j < L; ++j) {
        const Point off = wrap_offset(bs_positions[static_cast<std::size_t>(j)], pos, cfg.area_side);
        distance[static_cast<std::size_t>(j)] = off.norm();
        net.aoa(j, l, k) = std::atan2(off.y(), off.x());
      }

      bool ok = false;
      for (int attempt = 0; attempt < kMaxShadowResamples && !ok; ++attempt) {
        for (Index j = 0; j < L; ++j) {
          const auto js = static_cast<std::size_t>(j);
          beta[js] = large_scale_fading(distance[js], shadow(rng), cfg.pathloss_intercept,
                                        cfg.pathloss_exponent_coeff);
        }
        ok = true;
        const double own = beta[static_cast<std::size_t>(l)];
        for (Index j = 0; j < L; ++j) {
          if (j != l && !(own > beta[static_cast<std::size_t>(j)])) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) {
        throw std::runtime_error("shadow fading resampling cap reached for user " +
                                 std::to_string(k) + " in cell " + std::to_string(l));
      }
      for (Index j = 0; j < L; ++j) net.beta(j, l, k) = beta[static_cast<std::size_t>(j)];
    }
  }
  return net;
}

std::uint64_t drop_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

NetworkRealization realize_network(const NetworkConfig& cfg, std::uint64_t index) {
  Rng rng(drop_seed(cfg.seed, index));
  return drop_users(cfg, build_layout(cfg), rng);
}

}  // namespace mimopc
