#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mimopc/coefficients.hpp"
#include "mimopc/evaluation.hpp"
#include "mimopc/solver.hpp"

namespace mimopc {

/// {"direction", "a"[l][k], "b"[l][k][l'][k'], "c"[l][k][l'], "d"[l][k], "P"[l] = cells
/// sharing l's pilots}.
nlohmann::json coefficients_to_json(const SinrCoefficientSet& c);
/// Throws std::invalid_argument on malformed or inconsistent records.
SinrCoefficientSet coefficients_from_json(const nlohmann::json& j);

nlohmann::json outcome_to_json(const SolveOutcome& o, const KktReport& kkt);

/// Header: drop,cell,user,scheme,direction,sinr,se
void write_results_csv(std::ostream& os, const ExperimentResult& r);
nlohmann::json summary_json(const ExperimentResult& r);

void write_scalability_csv(std::ostream& os, const std::vector<ScalabilityRow>& rows);
void write_budget_csv(std::ostream& os, const std::vector<BudgetRow>& rows);

/// <out>/<experiment>/<tag>/, created if needed. An empty tag becomes a UTC timestamp.
std::filesystem::path make_output_dir(const std::filesystem::path& out,
                                      const std::string& experiment, std::string tag);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mimopc
