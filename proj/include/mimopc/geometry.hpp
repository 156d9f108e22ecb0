#pragma once

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mimopc/config.hpp"
#include "mimopc/types.hpp"

namespace mimopc {

using Point = Eigen::Vector2d;
using Rng = std::mt19937_64;

/// One Monte-Carlo drop: positions, large-scale fading and pilot groups.
struct NetworkRealization {
  Index num_cells = 0;
  Index users_per_cell = 0;
  double area_side = 0.0;
  std::vector<Point> bs_positions;
  std::vector<Point> user_positions;  // flat, user_index(l, k, K)
  LinkArray<double> beta;             // beta(bs, cell, user), linear scale
  LinkArray<double> aoa;              // nominal angle of arrival at bs, radians
  PilotAssignment pilots;
};

/// BS positions on a sqrt(L) x sqrt(L) grid of square cells, row-major (x fastest).
std::vector<Point> build_layout(const NetworkConfig& cfg);

/// Displacement q' - p to the nearest of the nine toroidal copies q' of q.
Point wrap_offset(const Point& p, const Point& q, double area_side);
double wrap_distance(const Point& p, const Point& q, double area_side);

/// Pathloss + shadowing in linear scale; d is clamped to >= 1 m.
double large_scale_fading(double distance_m, double shadow_db, double intercept_db = -35.0,
                          double exponent_coeff_db = 36.7);

/// f=1: one group; f=2: checkerboard; f=4: 2x2 block coloring of the grid.
PilotAssignment pilot_groups(Index num_cells, int reuse);

/// Throws std::runtime_error if shadowing resampling for a user exceeds this cap.
inline constexpr int kMaxShadowResamples = 1000;

NetworkRealization drop_users(const NetworkConfig& cfg, const std::vector<Point>& bs_positions,
                              Rng& rng);

/// Seed of drop `index` derived from the experiment seed (splitmix64 mixing).
std::uint64_t drop_seed(std::uint64_t seed, std::uint64_t index);

/// Layout + drop with the rng seeded by drop_seed(cfg.seed, index).
NetworkRealization realize_network(const NetworkConfig& cfg, std::uint64_t index);

}  // namespace mimopc
