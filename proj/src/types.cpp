#include "mimopc/types.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace mimopc {

namespace {

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_' || c == ' ') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

std::string_view to_string(Direction d) { return d == Direction::Uplink ? "ul" : "dl"; }

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::GmPerCellMmf: return "gm";
    case Scheme::NetworkMmf: return "nwmmf";
    case Scheme::NetworkPf: return "nwpf";
  }
  return "?";
}

std::string_view to_string(FadingModel f) {
  return f == FadingModel::Correlated ? "correlated" : "uncorrelated";
}

Direction parse_direction(std::string_view s) {
  const auto n = normalize(s);
  if (n == "ul" || n == "uplink") return Direction::Uplink;
  if (n == "dl" || n == "downlink") return Direction::Downlink;
  throw std::invalid_argument("unknown direction '" + std::string(s) + "'");
}

Scheme parse_scheme(std::string_view s) {
  const auto n = normalize(s);
  if (n == "gm" || n == "gmpercellmmf") return Scheme::GmPerCellMmf;
  if (n == "nwmmf" || n == "networkmmf") return Scheme::NetworkMmf;
  if (n == "nwpf" || n == "networkpf") return Scheme::NetworkPf;
  throw std::invalid_argument("unknown scheme '" + std::string(s) + "'");
}

FadingModel parse_fading(std::string_view s) {
  const auto n = normalize(s);
  if (n == "correlated") return FadingModel::Correlated;
  if (n == "uncorrelated") return FadingModel::Uncorrelated;
  throw std::invalid_argument("unknown fading model '" + std::string(s) + "'");
}

PilotAssignment::PilotAssignment(std::vector<int> group_of) : group_of_(std::move(group_of)) {
  members_.resize(group_of_.size());
  std::map<int, std::vector<Index>> by_group;
  for (std::size_t l = 0; l < group_of_.size(); ++l) {
    by_group[group_of_[l]].push_back(static_cast<Index>(l));
  }
  for (std::size_t l = 0; l < group_of_.size(); ++l) {
    members_[l] = by_group[group_of_[l]];
  }
}

PilotAssignment PilotAssignment::orthogonal(Index num_cells) {
  std::vector<int> g(static_cast<std::size_t>(num_cells));
  for (std::size_t l = 0; l < g.size(); ++l) g[l] = static_cast<int>(l);
  return PilotAssignment(std::move(g));
}

PilotAssignment PilotAssignment::full_reuse(Index num_cells) {
  return PilotAssignment(std::vector<int>(static_cast<std::size_t>(num_cells), 0));
}

PilotAssignment PilotAssignment::from_sets(const std::vector<std::vector<Index>>& sets) {
  const auto L = sets.size();
  std::vector<int> group(L, -1);
  int next = 0;
  for (std::size_t l = 0; l < L; ++l) {
    if (group[l] >= 0) continue;
    const auto& s = sets[l];
    if (std::find(s.begin(), s.end(), static_cast<Index>(l)) == s.end()) {
      throw std::invalid_argument("pilot set P[l] must contain l");
    }
    for (Index m : s) {
      if (m < 0 || static_cast<std::size_t>(m) >= L) {
        throw std::invalid_argument("pilot set references unknown cell");
      }
      group[static_cast<std::size_t>(m)] = next;
    }
    ++next;
  }
  PilotAssignment p(std::move(group));
  for (std::size_t l = 0; l < L; ++l) {
    auto expected = sets[l];
    std::sort(expected.begin(), expected.end());
    if (expected != p.sharing(static_cast<Index>(l))) {
      throw std::invalid_argument("pilot sets do not form a partition");
    }
  }
  return p;
}

}  // namespace mimopc
