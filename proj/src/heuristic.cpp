#include "mimopc/heuristic.hpp"

#include <cmath>
#include <stdexcept>

namespace mimopc {

namespace {

void require_positive_a(const SinrCoefficientSet& c) {
  c.validate();
  if ((c.a.array() <= 0).any()) throw std::invalid_argument("heuristic requires all a > 0");
}

Eigen::VectorXd cell_min(const Eigen::VectorXd& v, Index L, Index K) {
  Eigen::VectorXd out(L);
  for (Index l = 0; l < L; ++l) out(l) = v.segment(l * K, K).minCoeff();
  return out;
}

}  // namespace

HeuristicOutcome approx_ul(const SinrCoefficientSet& coeffs) {
  if (coeffs.direction != Direction::Uplink) throw std::invalid_argument("uplink set expected");
  require_positive_a(coeffs);
  const Index L = coeffs.num_cells;
  const Index K = coeffs.users_per_cell;
  HeuristicOutcome h;
  h.eta.resize(L * K);
  for (Index l = 0; l < L; ++l) {
    const double amin = coeffs.a.segment(l * K, K).minCoeff();
    for (Index k = 0; k < K; ++k) h.eta(l * K + k) = amin / coeffs.a(l * K + k);
  }
  h.exact_sinr = evaluate_sinr(coeffs, h.eta);
  h.approx_sinr.resize(L * K);
  for (Index l = 0; l < L; ++l) {
    const double v = (h.exact_sinr.segment(l * K, K).array() / h.eta.segment(l * K, K).array())
                         .minCoeff();
    h.approx_sinr.segment(l * K, K).setConstant(v);
  }
  h.cell_min_sinr = cell_min(h.exact_sinr, L, K);
  return h;
}

HeuristicOutcome approx_dl(const SinrCoefficientSet& coeffs) {
  if (coeffs.direction != Direction::Downlink) throw std::invalid_argument("downlink set expected");
  require_positive_a(coeffs);
  const Index L = coeffs.num_cells;
  const Index K = coeffs.users_per_cell;
  const Eigen::VectorXd bbar = coeffs.b.rowwise().sum() / static_cast<double>(K);
  const Eigen::VectorXd w = (coeffs.d + bbar).cwiseQuotient(coeffs.a);
  HeuristicOutcome h;
  h.eta.resize(L * K);
  for (Index l = 0; l < L; ++l) {
    h.eta.segment(l * K, K) = w.segment(l * K, K) / w.segment(l * K, K).sum();
  }
  h.exact_sinr = evaluate_sinr(coeffs, h.eta);
  h.approx_sinr.resize(L * K);
  for (Index l = 0; l < L; ++l) {
    const double v =
        1.0 / (h.eta.segment(l * K, K).array() / h.exact_sinr.segment(l * K, K).array()).sum();
    h.approx_sinr.segment(l * K, K).setConstant(v);
  }
  h.cell_min_sinr = cell_min(h.exact_sinr, L, K);
  return h;
}

HeuristicOutcome approx_percell(const SinrCoefficientSet& coeffs) {
  return coeffs.direction == Direction::Uplink ? approx_ul(coeffs) : approx_dl(coeffs);
}

double gm_log_objective(const Eigen::VectorXd& cell_sinr, double epsilon) {
  double s = 0.0;
  for (Index l = 0; l < cell_sinr.size(); ++l) s += std::log(std::log2(1.0 + epsilon + cell_sinr(l)));
  return s;
}

}  // namespace mimopc
