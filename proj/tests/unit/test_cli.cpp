#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "mimopc/io.hpp"

using namespace mimopc;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(MIMOPC_BINARY) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::current_path() / "cli_scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SinrCoefficientSet instance(Index L, Index K, Direction dir) {
  NetworkConfig cfg;
  cfg.num_cells = L;
  cfg.users_per_cell = K;
  cfg.antennas = 16;
  return build_coefficients(realize_network(cfg, 0), cfg, FadingModel::Correlated, {dir}).front();
}

const std::string kSmall = "--cells 4 --users 2 --antennas 8 --threads 1";

}  // namespace

TEST_CASE("selftest passes and the tampered run fails") {
  const auto ok = run("selftest");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS link-derivatives") != std::string::npos);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  const auto bad = run("selftest --perturb");
  CHECK(bad.code == 4);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("help documents the CSV columns and exit codes") {
  const auto h = run("--help");
  CHECK(h.code == 0);
  CHECK(h.out.find("drop,cell,user,scheme,direction,sinr,se") != std::string::npos);
  CHECK(h.out.find("selftest") != std::string::npos);
}

TEST_CASE("usage and configuration errors exit with 2") {
  const auto dir = scratch("errors");
  CHECK(run("simulate --config " + (dir / "missing.json").string()).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("simulate --schemes best " + kSmall).code == 2);
  CHECK(run("simulate --cells 5").code == 2);
  {
    std::ofstream bad(dir / "bad.json");
    bad << R"({"num_cells": 4, "colour": "red"})";
  }
  CHECK(run("simulate --config " + (dir / "bad.json").string()).code == 2);
  CHECK(run("solve --input " + (dir / "missing.json").string() + " --scheme gm").code == 2);
}

TEST_CASE("simulate writes the resolved config, results and summary") {
  const auto dir = scratch("simulate");
  const auto r = run("simulate --drops 2 --schemes gm,nwpf --fading uncorrelated --tag a --out " +
                     dir.string() + " " + kSmall);
  REQUIRE(r.code == 0);
  const auto out = dir / "simulate" / "a";
  CHECK(fs::exists(out / "config.resolved.json"));
  CHECK(fs::exists(out / "results.csv"));
  CHECK(fs::exists(out / "summary.json"));
  const auto resolved = nlohmann::json::parse(slurp(out / "config.resolved.json"));
  CHECK(resolved["num_cells"] == 4);
  CHECK(resolved["fading"] == "uncorrelated");
  std::istringstream csv(slurp(out / "results.csv"));
  std::string line;
  int rows = 0;
  std::getline(csv, line);
  while (std::getline(csv, line)) {
    ++rows;
    CHECK((line.find(",gm,") != std::string::npos || line.find(",nwpf,") != std::string::npos));
  }
  CHECK(rows == 2 * 8 * 2 * 2);
}

TEST_CASE("a config file is read and flags override it") {
  const auto dir = scratch("config");
  {
    std::ofstream cfg(dir / "c.json");
    cfg << R"({"num_cells": 4, "users_per_cell": 3, "antennas": 8, "seed": 3})";
  }
  const auto r = run("simulate --drops 1 --schemes gm --direction ul --fading uncorrelated --users 2 --tag t --out " +
                     dir.string() + " --config " + (dir / "c.json").string());
  REQUIRE(r.code == 0);
  const auto resolved = nlohmann::json::parse(slurp(dir / "simulate" / "t" / "config.resolved.json"));
  CHECK(resolved["users_per_cell"] == 2);
  CHECK(resolved["antennas"] == 8);
  CHECK(resolved["seed"] == 3);
}

TEST_CASE("identical seeds give identical files") {
  const auto dir = scratch("seed");
  for (const char* tag : {"x", "y"}) {
    REQUIRE(run("simulate --drops 2 --seed 7 --tag " + std::string(tag) + " --out " + dir.string() +
                " " + kSmall).code == 0);
  }
  const auto x = dir / "simulate" / "x";
  const auto y = dir / "simulate" / "y";
  CHECK(slurp(x / "results.csv") == slurp(y / "results.csv"));
  CHECK(slurp(x / "config.resolved.json") == slurp(y / "config.resolved.json"));
  auto sx = nlohmann::json::parse(slurp(x / "summary.json"));
  auto sy = nlohmann::json::parse(slurp(y / "summary.json"));
  sx.erase("runtime");
  sy.erase("runtime");
  CHECK(sx == sy);
}

TEST_CASE("solve round trip is certified") {
  const auto dir = scratch("solve");
  for (Direction d : {Direction::Uplink, Direction::Downlink}) {
    const auto s = instance(4, 2, d);
    const auto in = dir / "coeffs.json";
    write_json_file(in, coefficients_to_json(s));
    for (const char* scheme : {"gm", "nwmmf", "nwpf"}) {
      const auto r = run("solve --input " + in.string() + " --scheme " + scheme);
      REQUIRE(r.code == 0);
      const auto j = nlohmann::json::parse(r.out);
      CHECK(j["kkt"]["max"].get<double>() <= 1e-6);
      const auto eta = j["eta"].get<std::vector<double>>();
      const Eigen::VectorXd sinr = evaluate_sinr(s, Eigen::Map<const Eigen::VectorXd>(eta.data(), 8));
      const auto reported = j["sinr"].get<std::vector<double>>();
      for (Index u = 0; u < 8; ++u) {
        CHECK(std::abs(sinr(u) - reported[static_cast<std::size_t>(u)]) <= 1e-9 * sinr(u));
      }
    }
  }
}

TEST_CASE("solve: per-cell and network max-min agree on one cell; bad scheme is a usage error") {
  const auto dir = scratch("solve1");
  const auto in = dir / "one.json";
  write_json_file(in, coefficients_to_json(instance(1, 4, Direction::Uplink)));
  const auto gm = nlohmann::json::parse(run("solve --input " + in.string() + " --scheme gm").out);
  const auto mmf = nlohmann::json::parse(run("solve --input " + in.string() + " --scheme nwmmf").out);
  const auto a = gm["sinr"].get<std::vector<double>>();
  const auto b = mmf["sinr"].get<std::vector<double>>();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-6 * b[i]);
  CHECK(run("solve --input " + in.string() + " --scheme fastest").code == 2);
  const auto out = dir / "out.json";
  CHECK(run("solve --input " + in.string() + " --scheme nwpf --output " + out.string()).code == 0);
  CHECK(nlohmann::json::parse(slurp(out))["status"] == "optimal");
}

TEST_CASE("scalability and power-sweep subcommands") {
  const auto dir = scratch("sweeps");
  const auto s = run("scalability --offsets 0,-140 --fading uncorrelated --tag s --out " + dir.string() +
                     " --cells 4 --antennas 16");
  REQUIRE(s.code == 0);
  const auto csv = slurp(dir / "scalability" / "s" / "results.csv");
  CHECK(csv.rfind("offset_db,nwmmf_sum_se,nwpf_sum_se,gm_sum_se", 0) == 0);
  const auto p = run("power-sweep --drops 2 --ul-budgets 0.1,0.2 --dl-budgets 10,40 --fading uncorrelated "
                     "--tag p --out " + dir.string() + " --antennas 16 --threads 1");
  REQUIRE(p.code == 0);
  const auto table = nlohmann::json::parse(slurp(dir / "power-sweep" / "p" / "summary.json"));
  CHECK(table["rows"].size() == 2 * 2 * 3);
}
