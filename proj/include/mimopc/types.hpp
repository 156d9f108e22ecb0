#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mimopc {

using Index = Eigen::Index;

enum class Direction { Uplink, Downlink };

enum class Scheme { GmPerCellMmf, NetworkMmf, NetworkPf };

enum class FadingModel { Correlated, Uncorrelated };

std::string_view to_string(Direction d);
std::string_view to_string(Scheme s);
std::string_view to_string(FadingModel f);

/// Accepts "ul"/"uplink"/"UL" and "dl"/"downlink"/"DL".
Direction parse_direction(std::string_view s);
/// Accepts "gm", "nwmmf", "nwpf" (case-insensitive, '-' and '_' ignored).
Scheme parse_scheme(std::string_view s);
FadingModel parse_fading(std::string_view s);

/// Flat index of user k served in cell l.
constexpr Index user_index(Index cell, Index user, Index users_per_cell) {
  return cell * users_per_cell + user;
}

/// Pilot-reuse groups: cells with the same group id share the same K pilots.
class PilotAssignment {
 public:
  PilotAssignment() = default;
  explicit PilotAssignment(std::vector<int> group_of);

  /// Every cell in its own group (no pilot contamination).
  static PilotAssignment orthogonal(Index num_cells);
  /// All cells share one group.
  static PilotAssignment full_reuse(Index num_cells);
  /// Build from explicit sharing sets; sets must form a partition.
  static PilotAssignment from_sets(const std::vector<std::vector<Index>>& sets);

  Index num_cells() const { return static_cast<Index>(group_of_.size()); }
  int group_of(Index cell) const { return group_of_[static_cast<std::size_t>(cell)]; }
  bool share(Index a, Index b) const { return group_of(a) == group_of(b); }
  /// P[l]: every cell sharing cell l's pilots, including l.
  const std::vector<Index>& sharing(Index cell) const {
    return members_[static_cast<std::size_t>(cell)];
  }
  const std::vector<int>& groups() const { return group_of_; }

 private:
  std::vector<int> group_of_;
  std::vector<std::vector<Index>> members_;
};

/// Dense (bs, cell, user) array, e.g. beta^{bs}_{cell,user}.
template <typename T>
class LinkArray {
 public:
  LinkArray() = default;
  LinkArray(Index num_cells, Index users_per_cell, T init = T{})
      : L_(num_cells), K_(users_per_cell),
        data_(static_cast<std::size_t>(num_cells * num_cells * users_per_cell), init) {}

  Index num_cells() const { return L_; }
  Index users_per_cell() const { return K_; }

  T& operator()(Index bs, Index cell, Index user) { return data_[offset(bs, cell, user)]; }
  const T& operator()(Index bs, Index cell, Index user) const {
    return data_[offset(bs, cell, user)];
  }

 private:
  std::size_t offset(Index bs, Index cell, Index user) const {
    return static_cast<std::size_t>((bs * L_ + cell) * K_ + user);
  }
  Index L_ = 0;
  Index K_ = 0;
  std::vector<T> data_;
};

}  // namespace mimopc
