#include "mimopc/io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace mimopc {

nlohmann::json coefficients_to_json(const SinrCoefficientSet& c) {
  const Index L = c.num_cells;
  const Index K = c.users_per_cell;
  nlohmann::json a = nlohmann::json::array(), b = nlohmann::json::array(),
                 cc = nlohmann::json::array(), d = nlohmann::json::array(),
                 P = nlohmann::json::array();
  for (Index l = 0; l < L; ++l) {
    nlohmann::json al, bl, cl, dl;
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      al.push_back(c.a(u));
      dl.push_back(c.d(u));
      nlohmann::json bu;
      for (Index lp = 0; lp < L; ++lp) {
        nlohmann::json row;
        for (Index kp = 0; kp < K; ++kp) row.push_back(c.b(u, user_index(lp, kp, K)));
        bu.push_back(row);
      }
      bl.push_back(bu);
      nlohmann::json cu;
      for (Index lp = 0; lp < L; ++lp) cu.push_back(c.c(u, lp));
      cl.push_back(cu);
    }
    a.push_back(al);
    b.push_back(bl);
    cc.push_back(cl);
    d.push_back(dl);
    P.push_back(c.pilots.sharing(l));
  }
  return {{"direction", to_string(c.direction)}, {"a", a}, {"b", b}, {"c", cc}, {"d", d}, {"P", P}};
}

namespace {

PilotAssignment pilots_from_sets(const std::vector<std::vector<Index>>& P) {
  const auto L = static_cast<Index>(P.size());
  std::vector<std::vector<Index>> sorted(P);
  for (auto& s : sorted) {
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) {
      throw std::invalid_argument("P contains a repeated cell");
    }
  }
  std::vector<int> group(static_cast<std::size_t>(L), -1);
  int next = 0;
  for (Index l = 0; l < L; ++l) {
    const auto& s = sorted[static_cast<std::size_t>(l)];
    if (!std::binary_search(s.begin(), s.end(), l)) {
      throw std::invalid_argument("P[l] must contain l");
    }
    for (Index lp : s) {
      if (lp < 0 || lp >= L) throw std::invalid_argument("P refers to an unknown cell");
      if (sorted[static_cast<std::size_t>(lp)] != s) {
        throw std::invalid_argument("P is not induced by a partition of the cells");
      }
    }
    if (group[static_cast<std::size_t>(l)] < 0) {
      for (Index lp : s) group[static_cast<std::size_t>(lp)] = next;
      ++next;
    }
  }
  return PilotAssignment(group);
}

}  // namespace

SinrCoefficientSet coefficients_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw std::invalid_argument("coefficient record must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::vector<std::string> known{"direction", "a", "b", "c", "d", "P"};
      if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
        throw std::invalid_argument("unknown field '" + it.key() + "'");
      }
    }
    const auto a = j.at("a").get<std::vector<std::vector<double>>>();
    const auto b = j.at("b").get<std::vector<std::vector<std::vector<std::vector<double>>>>>();
    const auto c = j.at("c").get<std::vector<std::vector<std::vector<double>>>>();
    const auto d = j.at("d").get<std::vector<std::vector<double>>>();
    const auto L = static_cast<Index>(a.size());
    if (L < 1 || a[0].empty()) throw std::invalid_argument("a must be a nonempty L x K array");
    const auto K = static_cast<Index>(a[0].size());
    std::vector<std::vector<Index>> P;
    if (j.contains("P")) {
      P = j.at("P").get<std::vector<std::vector<Index>>>();
    } else {
      for (Index l = 0; l < L; ++l) P.push_back({l});
    }
    if (static_cast<Index>(P.size()) != L) throw std::invalid_argument("P must have L entries");

    SinrCoefficientSet s;
    s.direction = parse_direction(j.at("direction").get<std::string>());
    s.num_cells = L;
    s.users_per_cell = K;
    s.pilots = pilots_from_sets(P);
    s.a.resize(L * K);
    s.d.resize(L * K);
    s.b.resize(L * K, L * K);
    s.c = Eigen::MatrixXd::Zero(L * K, L);
    auto need = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string(what) + " has the wrong shape");
    };
    need(static_cast<Index>(d.size()) == L && static_cast<Index>(b.size()) == L &&
             static_cast<Index>(c.size()) == L,
         "b/c/d");
    for (Index l = 0; l < L; ++l) {
      const auto ls = static_cast<std::size_t>(l);
      need(static_cast<Index>(a[ls].size()) == K && static_cast<Index>(d[ls].size()) == K &&
               static_cast<Index>(b[ls].size()) == K && static_cast<Index>(c[ls].size()) == K,
           "a/b/c/d");
      for (Index k = 0; k < K; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const Index u = user_index(l, k, K);
        s.a(u) = a[ls][ks];
        s.d(u) = d[ls][ks];
        need(static_cast<Index>(b[ls][ks].size()) == L && static_cast<Index>(c[ls][ks].size()) == L,
             "b/c");
        for (Index lp = 0; lp < L; ++lp) {
          const auto lps = static_cast<std::size_t>(lp);
          need(static_cast<Index>(b[ls][ks][lps].size()) == K, "b");
          for (Index kp = 0; kp < K; ++kp) {
            s.b(u, user_index(lp, kp, K)) = b[ls][ks][lps][static_cast<std::size_t>(kp)];
          }
          const double cv = c[ls][ks][lps];
          if (lp != l && s.pilots.share(l, lp)) {
            s.c(u, lp) = cv;
          } else if (cv != 0.0) {
            throw std::invalid_argument("c is nonzero for a cell outside P[l] \\ {l}");
          }
        }
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed coefficient record: ") + e.what());
  }
}

namespace {

nlohmann::json vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

nlohmann::json outcome_to_json(const SolveOutcome& o, const KktReport& kkt) {
  return {{"scheme", to_string(o.scheme)},
          {"direction", to_string(o.direction)},
          {"status", to_string(o.status)},
          {"eta", vec(o.eta)},
          {"targets", vec(o.targets)},
          {"sinr", vec(o.sinr)},
          {"objective", o.objective},
          {"log_objective", o.log_objective},
          {"kkt_residual", o.kkt_residual},
          {"constraint_violation", o.constraint_violation},
          {"iterations", o.iterations},
          {"kkt",
           {{"stationarity", kkt.stationarity},
            {"primal", kkt.primal},
            {"dual", kkt.dual},
            {"complementarity", kkt.complementarity},
            {"max", kkt.max_residual}}}};
}

void write_results_csv(std::ostream& os, const ExperimentResult& r) {
  os << "drop,cell,user,scheme,direction,sinr,se\n";
  const Index K = r.config.users_per_cell;
  char buf[64];
  for (const auto& d : r.drops) {
    for (const auto& pr : d.results) {
      for (Index u = 0; u < pr.sinr.size(); ++u) {
        os << d.index << ',' << u / K << ',' << u % K << ',' << to_string(pr.policy) << ','
           << to_string(pr.direction) << ',';
        std::snprintf(buf, sizeof buf, "%.17g", pr.sinr(u));
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", pr.se(u));
        os << buf << '\n';
      }
    }
  }
}

namespace {

// Quantiles at evenly spaced levels: a compact CDF for plotting.
nlohmann::json cdf_points(const std::vector<double>& values, int levels = 200) {
  std::vector<double> x, p;
  for (int i = 0; i <= levels; ++i) {
    const double q = static_cast<double>(i) / levels;
    p.push_back(q);
    x.push_back(quantile(values, q));
  }
  return {{"value", x}, {"probability", p}};
}

}  // namespace

nlohmann::json summary_json(const ExperimentResult& r) {
  nlohmann::json series = nlohmann::json::array();
  nlohmann::json policy_runtime = nlohmann::json::object();
  for (const auto& s : r.series) {
    double max_kkt = 0.0, iterations = 0.0, seconds = 0.0;
    for (const auto& d : r.drops) {
      const auto& pr = d.get(s.policy, s.direction);
      max_kkt = std::max(max_kkt, pr.kkt_residual);
      iterations += pr.iterations;
      seconds += pr.runtime_s;
    }
    const std::string key = std::string(to_string(s.policy)) + "_" + std::string(to_string(s.direction));
    policy_runtime[key] = seconds;
    series.push_back({{"scheme", to_string(s.policy)},
                      {"direction", to_string(s.direction)},
                      {"p5_sum_se", s.p5_sum_se},
                      {"p2_user_se", s.p2_user_se},
                      {"median_sum_se", s.median_sum_se},
                      {"mean_sum_se", s.mean_sum_se},
                      {"max_kkt_residual", max_kkt},
                      {"mean_iterations", iterations / static_cast<double>(r.drops.size())},
                      {"user_se_cdf", cdf_points(s.user_se)},
                      {"sum_se_cdf", cdf_points(s.sum_se)}});
  }
  nlohmann::json orderings = nlohmann::json::object();
  for (Direction dir : r.options.directions) {
    auto has = [&](Policy p) {
      return std::find(r.options.policies.begin(), r.options.policies.end(), p) !=
             r.options.policies.end();
    };
    nlohmann::json o = nlohmann::json::object();
    if (has(Policy::Gm) && has(Policy::NwMmf) && has(Policy::NwPf)) {
      const auto& gm = r.get(Policy::Gm, dir);
      const auto& mmf = r.get(Policy::NwMmf, dir);
      const auto& pf = r.get(Policy::NwPf, dir);
      o["p5_sum_se_nwpf_gt_gm_gt_nwmmf"] =
          pf.p5_sum_se > gm.p5_sum_se && gm.p5_sum_se > mmf.p5_sum_se;
      o["p2_user_se_gm_ge_nwpf"] = gm.p2_user_se >= pf.p2_user_se;
    }
    orderings[std::string(to_string(dir))] = o;
  }
  std::size_t checks = 0, held = 0;
  for (const auto& d : r.drops) {
    for (const auto& c : d.domination) {
      ++checks;
      held += c.holds() ? 1 : 0;
    }
  }
  nlohmann::json policies = nlohmann::json::array();
  for (Policy p : r.options.policies) policies.push_back(to_string(p));
  nlohmann::json dirs = nlohmann::json::array();
  for (Direction d : r.options.directions) dirs.push_back(to_string(d));
  return {{"config", config_to_json(r.config)},
          {"drops", r.drops.size()},
          {"fading", to_string(r.options.fading)},
          {"schemes", policies},
          {"directions", dirs},
          {"series", series},
          {"orderings", orderings},
          {"heuristic_domination", {{"checked", checks}, {"held", held}}},
          // Wall-clock data; the only part of the summary that differs between identical runs.
          {"runtime", {{"total_s", r.runtime_s}, {"solver_s", policy_runtime}}}};
}

void write_scalability_csv(std::ostream& os, const std::vector<ScalabilityRow>& rows) {
  os << "offset_db,nwmmf_sum_se,nwpf_sum_se,gm_sum_se,gm_other_cells_sum_se,nwmmf_min_se,"
        "gm_without_cell_sum_se,user_a_full_power_se\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.offset_db, r.nwmmf_sum_se, r.nwpf_sum_se, r.gm_sum_se,
                  r.gm_other_cells_sum_se, r.nwmmf_min_se,
                  r.gm_without_cell_sum_se, r.user_a_full_power_se);
    os << buf;
  }
}

void write_budget_csv(std::ostream& os, const std::vector<BudgetRow>& rows) {
  os << "direction,budget_w,scheme,p5_sum_se,median_sum_se\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%g,%s,%.17g,%.17g\n", std::string(to_string(r.direction)).c_str(),
                  r.budget_w, std::string(to_string(r.policy)).c_str(), r.p5_sum_se,
                  r.median_sum_se);
    os << buf;
  }
}

std::filesystem::path make_output_dir(const std::filesystem::path& out,
                                      const std::string& experiment, std::string tag) {
  if (tag.empty()) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    tag = buf;
  }
  const auto dir = out / experiment / tag;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

}  // namespace mimopc
