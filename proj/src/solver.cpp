#include "mimopc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace mimopc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double term_exponent(const ExpTerm& t, const LseConstraint& c, const Eigen::VectorXd& x) {
  double e = t.log_coeff;
  for (int i = 0; i < t.nnz; ++i) e += t.weight[static_cast<std::size_t>(i)] *
                                       x(c.vars[static_cast<std::size_t>(t.pos[static_cast<std::size_t>(i)])]);
  return e;
}

// Value, local gradient and softmax weights of one constraint.
double lse_eval(const LseConstraint& c, const Eigen::VectorXd& x, std::vector<double>& p,
                Eigen::VectorXd& grad_local) {
  p.resize(c.terms.size());
  double mx = -kInf;
  for (std::size_t k = 0; k < c.terms.size(); ++k) {
    p[k] = term_exponent(c.terms[k], c, x);
    mx = std::max(mx, p[k]);
  }
  double sum = 0.0;
  for (double& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  grad_local.setZero(static_cast<Index>(c.vars.size()));
  for (std::size_t k = 0; k < c.terms.size(); ++k) {
    p[k] /= sum;
    const auto& t = c.terms[k];
    for (int i = 0; i < t.nnz; ++i) {
      grad_local(t.pos[static_cast<std::size_t>(i)]) += p[k] * t.weight[static_cast<std::size_t>(i)];
    }
  }
  return mx + std::log(sum);
}

ExpTerm make_term(double log_coeff, std::initializer_list<std::pair<int, double>> entries) {
  ExpTerm t;
  t.log_coeff = log_coeff;
  for (const auto& [pos, w] : entries) {
    t.pos[static_cast<std::size_t>(t.nnz)] = pos;
    t.weight[static_cast<std::size_t>(t.nnz)] = w;
    ++t.nnz;
  }
  return t;
}


// Minimal solution of eta = t (G eta + d) / a, i.e. the limit of the fixed-point iteration
// started at zero. Empty when the iteration diverges (no nonnegative solution exists).
std::optional<Eigen::VectorXd> minimal_fixed_point(const Eigen::MatrixXd& G,
                                                   const Eigen::VectorXd& a,
                                                   const Eigen::VectorXd& d,
                                                   const Eigen::VectorXd& t) {
  const Index N = a.size();
  const Eigen::VectorXd scale = t.cwiseQuotient(a);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(N, N) - scale.asDiagonal() * G;
  const Eigen::VectorXd rhs = scale.cwiseProduct(d);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::VectorXd eta = lu.solve(rhs);
  // A nonnegative solution with positive right-hand side exists iff the spectral radius of
  // diag(t/a) G is below one, and it is then the minimal fixed point.
  if (!eta.allFinite() || (eta.array() <= 0).any()) return std::nullopt;
  if ((A * eta - rhs).lpNorm<Eigen::Infinity>() > 1e-9 * rhs.lpNorm<Eigen::Infinity>()) {
    return std::nullopt;
  }
  return eta;
}

bool within_budget(const Eigen::VectorXd& eta, Direction dir, Index L, Index K) {
  if (dir == Direction::Uplink) return eta.maxCoeff() <= 1.0;
  for (Index l = 0; l < L; ++l) {
    if (eta.segment(l * K, K).sum() > 1.0) return false;
  }
  return true;
}

}  // namespace

double LseConstraint::value(const Eigen::VectorXd& x) const {
  double mx = -kInf;
  for (const auto& t : terms) mx = std::max(mx, term_exponent(t, *this, x));
  if (!std::isfinite(mx)) return mx;
  double sum = 0.0;
  for (const auto& t : terms) sum += std::exp(term_exponent(t, *this, x) - mx);
  return mx + std::log(sum);
}

double ConvexProblem::objective(const Eigen::VectorXd& x) const {
  const auto t = x.head(num_targets);
  if (scheme == Scheme::GmPerCellMmf) {
    double s = 0.0;
    for (Index j = 0; j < num_targets; ++j) s += concave_link(t(j), epsilon).value;
    return s;
  }
  return t.sum();
}

Eigen::VectorXd ConvexProblem::objective_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(num_vars);
  for (Index j = 0; j < num_targets; ++j) {
    g(j) = scheme == Scheme::GmPerCellMmf ? concave_link(x(j), epsilon).first : 1.0;
  }
  return g;
}

Eigen::VectorXd ConvexProblem::objective_curvature(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(num_vars);
  if (scheme == Scheme::GmPerCellMmf) {
    for (Index j = 0; j < num_targets; ++j) h(j) = concave_link(x(j), epsilon).second;
  }
  return h;
}

ConvexProblem build_problem(const SinrCoefficientSet& coeffs, Scheme scheme,
                            const ProblemOptions& options) {
  coeffs.validate();
  if (!(options.epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
  if (!(options.eta_floor > 0 && options.eta_floor < 1)) {
    throw std::invalid_argument("eta_floor must lie in (0, 1)");
  }
  const Index L = coeffs.num_cells;
  const Index K = coeffs.users_per_cell;
  const Index N = coeffs.num_users();

  ConvexProblem p;
  p.scheme = scheme;
  p.direction = coeffs.direction;
  p.coeffs = coeffs;
  p.epsilon = options.epsilon;
  p.eta_var.assign(static_cast<std::size_t>(N), -1);
  p.target_var.assign(static_cast<std::size_t>(N), -1);

  std::vector<bool> live(static_cast<std::size_t>(L), true);
  for (Index l : options.excluded_cells) {
    if (scheme != Scheme::GmPerCellMmf) {
      throw std::invalid_argument("cell exclusion applies to the per-cell scheme only");
    }
    if (l < 0 || l >= L) throw std::invalid_argument("excluded cell out of range");
    live[static_cast<std::size_t>(l)] = false;
  }
  const bool any_dead_user = (coeffs.a.array() <= 0).any();
  if (scheme != Scheme::GmPerCellMmf && any_dead_user) {
    p.trivial_zero = true;
    return p;
  }
  for (Index l = 0; l < L; ++l) {
    if ((coeffs.a.segment(l * K, K).array() <= 0).any()) live[static_cast<std::size_t>(l)] = false;
  }

  // Variables: targets first, then one log-power per active user.
  Index nt = 0;
  if (scheme == Scheme::NetworkMmf) nt = 1;
  for (Index l = 0; l < L; ++l) {
    if (!live[static_cast<std::size_t>(l)]) continue;
    if (scheme == Scheme::GmPerCellMmf) p.target_cell.push_back(l);
    for (Index k = 0; k < K; ++k) {
      const Index u = user_index(l, k, K);
      auto& tv = p.target_var[static_cast<std::size_t>(u)];
      if (scheme == Scheme::NetworkPf) {
        tv = nt++;
      } else {
        tv = scheme == Scheme::NetworkMmf ? 0 : nt;
      }
    }
    if (scheme == Scheme::GmPerCellMmf) ++nt;
  }
  if (nt == 0) {
    p.trivial_zero = true;
    return p;
  }
  p.num_targets = nt;
  Index nv = nt;
  for (Index u = 0; u < N; ++u) {
    if (p.target_var[static_cast<std::size_t>(u)] >= 0) p.eta_var[static_cast<std::size_t>(u)] = nv++;
  }
  p.num_vars = nv;

  const Eigen::MatrixXd G = coeffs.coupling_matrix();
  Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(N);
  const double start = coeffs.direction == Direction::Uplink ? 0.5 : 0.5 / static_cast<double>(K);
  for (Index u = 0; u < N; ++u) {
    if (p.eta_var[static_cast<std::size_t>(u)] >= 0) eta0(u) = start;
  }
  const Eigen::VectorXd sinr0 = evaluate_sinr(coeffs, eta0);

  Eigen::VectorXd t0 = Eigen::VectorXd::Constant(nt, kInf);
  Eigen::VectorXd floor_sinr = Eigen::VectorXd::Constant(nt, kInf);
  for (Index u = 0; u < N; ++u) {
    const Index j = p.target_var[static_cast<std::size_t>(u)];
    if (j < 0) continue;
    t0(j) = std::min(t0(j), sinr0(u));
    double interference = coeffs.d(u);
    for (Index v = 0; v < N; ++v) {
      if (p.eta_var[static_cast<std::size_t>(v)] >= 0) interference += G(u, v);
    }
    floor_sinr(j) = std::min(floor_sinr(j), coeffs.a(u) * options.eta_floor / interference);
  }

  p.x0 = Eigen::VectorXd::Zero(nv);
  for (Index j = 0; j < nt; ++j) p.x0(j) = std::log(0.9 * t0(j));
  for (Index u = 0; u < N; ++u) {
    const Index iv = p.eta_var[static_cast<std::size_t>(u)];
    if (iv >= 0) p.x0(iv) = std::log(start);
  }

  // SINR constraints, normalized by a_u.
  for (Index u = 0; u < N; ++u) {
    const Index iu = p.eta_var[static_cast<std::size_t>(u)];
    if (iu < 0) continue;
    LseConstraint c;
    c.kind = LseConstraint::Kind::Sinr;
    c.owner = u;
    c.vars = {p.target_var[static_cast<std::size_t>(u)], iu};
    const double log_a = std::log(coeffs.a(u));
    for (Index v = 0; v < N; ++v) {
      const Index iv = p.eta_var[static_cast<std::size_t>(v)];
      if (iv < 0 || !(G(u, v) > 0)) continue;
      if (v == u) {
        c.terms.push_back(make_term(std::log(G(u, v)) - log_a, {{0, 1.0}}));
      } else {
        c.vars.push_back(iv);
        const int pos = static_cast<int>(c.vars.size()) - 1;
        c.terms.push_back(make_term(std::log(G(u, v)) - log_a, {{0, 1.0}, {pos, 1.0}, {1, -1.0}}));
      }
    }
    c.terms.push_back(make_term(std::log(coeffs.d(u)) - log_a, {{0, 1.0}, {1, -1.0}}));
    p.constraints.push_back(std::move(c));
  }

  // Power constraints.
  if (coeffs.direction == Direction::Uplink) {
    for (Index u = 0; u < N; ++u) {
      const Index iu = p.eta_var[static_cast<std::size_t>(u)];
      if (iu < 0) continue;
      LseConstraint c;
      c.kind = LseConstraint::Kind::Power;
      c.owner = u;
      c.vars = {iu};
      c.terms.push_back(make_term(0.0, {{0, 1.0}}));
      p.constraints.push_back(std::move(c));
    }
  } else {
    for (Index l = 0; l < L; ++l) {
      LseConstraint c;
      c.kind = LseConstraint::Kind::Power;
      c.owner = l;
      for (Index k = 0; k < K; ++k) {
        const Index iu = p.eta_var[static_cast<std::size_t>(user_index(l, k, K))];
        if (iu < 0) continue;
        c.vars.push_back(iu);
        c.terms.push_back(make_term(0.0, {{static_cast<int>(c.vars.size()) - 1, 1.0}}));
      }
      if (!c.terms.empty()) p.constraints.push_back(std::move(c));
    }
  }

  // Bounds that keep the barrier function bounded below. Neither is active at the optimum
  // unless some optimal power is below eta_floor.
  const double log_floor = std::log(options.eta_floor);
  for (Index u = 0; u < N; ++u) {
    const Index iu = p.eta_var[static_cast<std::size_t>(u)];
    if (iu < 0) continue;
    LseConstraint c;
    c.kind = LseConstraint::Kind::EtaFloor;
    c.owner = u;
    c.vars = {iu};
    c.terms.push_back(make_term(log_floor, {{0, -1.0}}));
    p.constraints.push_back(std::move(c));
  }
  for (Index j = 0; j < nt; ++j) {
    LseConstraint c;
    c.kind = LseConstraint::Kind::TargetFloor;
    c.owner = j;
    c.vars = {j};
    const double lo = std::min(std::log(floor_sinr(j)), p.x0(j) - 1.0) - 1.0;
    c.terms.push_back(make_term(lo, {{0, -1.0}}));
    p.constraints.push_back(std::move(c));
  }
  return p;
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

double log_objective(const ConvexProblem& problem, const Eigen::VectorXd& targets) {
  const auto& c = problem.coeffs;
  const Index L = c.num_cells;
  const Index K = c.users_per_cell;
  switch (problem.scheme) {
    case Scheme::GmPerCellMmf: {
      double s = 0.0;
      for (Index l = 0; l < L; ++l) {
        s += std::log(std::log2(1.0 + problem.epsilon + targets.segment(l * K, K).minCoeff()));
      }
      return s;
    }
    case Scheme::NetworkMmf:
      return std::log(targets.minCoeff());
    case Scheme::NetworkPf:
      return targets.array().log().sum();
  }
  return 0.0;
}

namespace {

double original_objective(const ConvexProblem& problem, const Eigen::VectorXd& targets) {
  const Index L = problem.coeffs.num_cells;
  const Index K = problem.coeffs.users_per_cell;
  switch (problem.scheme) {
    case Scheme::GmPerCellMmf: {
      double prod = 1.0;
      for (Index l = 0; l < L; ++l) {
        prod *= std::log2(1.0 + problem.epsilon + targets(user_index(l, 0, K)));
      }
      return prod;
    }
    case Scheme::NetworkMmf:
      return targets.minCoeff();
    case Scheme::NetworkPf:
      return targets.prod();
  }
  return 0.0;
}

double constraint_violation(const SinrCoefficientSet& c, const Eigen::VectorXd& eta,
                            const Eigen::VectorXd& sinr, const Eigen::VectorXd& targets) {
  double v = 0.0;
  for (Index u = 0; u < eta.size(); ++u) {
    v = std::max(v, -eta(u));
    if (targets(u) > 0) v = std::max(v, (targets(u) - sinr(u)) / targets(u));
  }
  const Index K = c.users_per_cell;
  if (c.direction == Direction::Uplink) {
    v = std::max(v, eta.maxCoeff() - 1.0);
  } else {
    for (Index l = 0; l < c.num_cells; ++l) v = std::max(v, eta.segment(l * K, K).sum() - 1.0);
  }
  return std::max(v, 0.0);
}

SolveOutcome trivial_outcome(const ConvexProblem& problem) {
  const auto& c = problem.coeffs;
  const Index N = c.num_users();
  SolveOutcome out;
  out.scheme = problem.scheme;
  out.direction = problem.direction;
  out.eta = Eigen::VectorXd::Zero(N);
  out.targets = Eigen::VectorXd::Zero(N);
  out.sinr = Eigen::VectorXd::Zero(N);
  out.objective = original_objective(problem, out.targets);
  out.log_objective = log_objective(problem, out.targets);
  out.status = SolveStatus::Optimal;
  return out;
}

// Barrier function value difference phi(y) - phi(x) for phi = -s obj - sum log(-g).
// Returns +inf if y is not strictly feasible.
double barrier_delta(const ConvexProblem& p, double s, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& y, const Eigen::VectorXd& gx) {
  double dobj = 0.0;
  if (p.scheme == Scheme::GmPerCellMmf) {
    for (Index j = 0; j < p.num_targets; ++j) {
      dobj += concave_link(y(j), p.epsilon).value - concave_link(x(j), p.epsilon).value;
    }
  } else {
    dobj = (y.head(p.num_targets) - x.head(p.num_targets)).sum();
  }
  double delta = -s * dobj;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const double gy = p.constraints[i].value(y);
    if (!(gy < 0)) return kInf;
    delta -= std::log(gy / gx(static_cast<Index>(i)));
  }
  return delta;
}

// Least-squares fit of s in s grad obj = sum grad g / (-g), i.e. the barrier weight for which
// x is closest to the central path.
double initial_barrier_weight(const ConvexProblem& p, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& gx) {
  const Eigen::VectorXd go = p.objective_gradient(x);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p.num_vars);
  Eigen::VectorXd gl;
  std::vector<double> w;
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    const auto& c = p.constraints[i];
    lse_eval(c, x, w, gl);
    for (std::size_t a = 0; a < c.vars.size(); ++a) {
      b(c.vars[a]) += gl(static_cast<Index>(a)) / -gx(static_cast<Index>(i));
    }
  }
  const double nn = go.squaredNorm();
  if (!(nn > 0)) return 1.0;
  return std::clamp(go.dot(b) / nn, 1.0, 1e6);
}

// Barrier multipliers 1/(s (-g)) corrected by the weighted least-squares step that zeroes the
// stationarity residual, with weights lambda/(-g) so that inactive constraints barely move.
Eigen::VectorXd refine_duals(const ConvexProblem& p, const Eigen::VectorXd& x, double s) {
  const auto m = static_cast<Index>(p.constraints.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, p.num_vars);
  Eigen::VectorXd lam(m);
  Eigen::VectorXd weight(m);
  Eigen::VectorXd gl;
  std::vector<double> w;
  for (Index i = 0; i < m; ++i) {
    const auto& c = p.constraints[static_cast<std::size_t>(i)];
    const double g = lse_eval(c, x, w, gl);
    for (std::size_t a = 0; a < c.vars.size(); ++a) J(i, c.vars[a]) += gl(static_cast<Index>(a));
    lam(i) = 1.0 / (s * -g);
    weight(i) = lam(i) / -g;
  }
  for (int pass = 0; pass < 2; ++pass) {
    const Eigen::VectorXd r = p.objective_gradient(x) - J.transpose() * lam;
    const Eigen::MatrixXd A = J.transpose() * weight.asDiagonal() * J;
    const Eigen::VectorXd dinv = A.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd As = dinv.asDiagonal() * A * dinv.asDiagonal();
    const Eigen::VectorXd z = dinv.cwiseProduct(As.ldlt().solve(dinv.cwiseProduct(r)));
    if (!z.allFinite()) break;
    lam = (lam + weight.cwiseProduct(J * z)).cwiseMax(0.0);
  }
  return lam;
}

}  // namespace

SolveOutcome solve(const ConvexProblem& problem, const SolveOptions& options) {
  if (problem.trivial_zero) return trivial_outcome(problem);

  const Index n = problem.num_vars;
  const auto m = static_cast<Index>(problem.constraints.size());
  Eigen::VectorXd x = problem.x0;
  Eigen::VectorXd gvals(m);
  for (Index i = 0; i < m; ++i) {
    gvals(i) = problem.constraints[static_cast<std::size_t>(i)].value(x);
    if (!(gvals(i) < 0)) throw std::logic_error("initial point is not strictly feasible");
  }

  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd grad(n);
  Eigen::VectorXd gl;
  std::vector<double> w;
  double s = initial_barrier_weight(problem, x, gvals);
  int steps = 0;
  SolveStatus status = SolveStatus::Optimal;

  while (true) {
    // Centering.
    while (true) {
      H.setZero();
      grad = -s * problem.objective_gradient(x);
      // Negative curvature of the link function (its convex region) is clipped, so the
      // step is a descent direction everywhere.
      const Eigen::VectorXd curv = problem.objective_curvature(x);
      for (Index j = 0; j < problem.num_targets; ++j) H(j, j) += s * std::max(-curv(j), 0.0);
      for (Index i = 0; i < m; ++i) {
        const auto& c = problem.constraints[static_cast<std::size_t>(i)];
        const double g = lse_eval(c, x, w, gl);
        gvals(i) = g;
        const double inv = 1.0 / (-g);
        const double outer = (1.0 + g) / (g * g);
        for (std::size_t a = 0; a < c.vars.size(); ++a) {
          grad(c.vars[a]) += inv * gl(static_cast<Index>(a));
          for (std::size_t b = 0; b < c.vars.size(); ++b) {
            H(c.vars[a], c.vars[b]) += outer * gl(static_cast<Index>(a)) * gl(static_cast<Index>(b));
          }
        }
        for (std::size_t k = 0; k < c.terms.size(); ++k) {
          const auto& t = c.terms[k];
          const double pk = inv * w[k];
          for (int r = 0; r < t.nnz; ++r) {
            for (int q = 0; q < t.nnz; ++q) {
              H(c.vars[static_cast<std::size_t>(t.pos[static_cast<std::size_t>(r)])],
                c.vars[static_cast<std::size_t>(t.pos[static_cast<std::size_t>(q)])]) +=
                  pk * t.weight[static_cast<std::size_t>(r)] * t.weight[static_cast<std::size_t>(q)];
            }
          }
        }
      }
      // Symmetric diagonal scaling first; barrier Hessians span many orders of magnitude.
      const Eigen::VectorXd dinv = H.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd Hs = dinv.asDiagonal() * H * dinv.asDiagonal();
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Hs);
      Eigen::VectorXd dx = -dinv.cwiseProduct(ldlt.solve(dinv.cwiseProduct(grad)));
      if (!dx.allFinite() || ldlt.info() != Eigen::Success) {
        dx = -grad / std::max(1.0, H.diagonal().maxCoeff());
      }
      const double slope = grad.dot(dx);
      // phi itself is only known to a few ulps of its magnitude; a smaller predicted decrease
      // cannot be realized by any step.
      double scale = 0.0;
      for (Index i = 0; i < m; ++i) scale += std::abs(std::log(-gvals(i)));
      if (-slope / 2.0 <= std::max(options.newton_tol, 1e-13 * scale)) break;
      if (steps >= options.max_newton_steps) {
        status = SolveStatus::MaxIterations;
        break;
      }

      // Decreases below the rounding noise of barrier_delta are not trusted.
      const double noise = 64.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(m);
      double alpha = 1.0;
      bool moved = false;
      const double ulp_step = 4.0 * std::numeric_limits<double>::epsilon() *
                              (1.0 + x.lpNorm<Eigen::Infinity>());
      const double dx_norm = dx.lpNorm<Eigen::Infinity>();
      while (-0.25 * alpha * slope > noise && alpha * dx_norm > ulp_step) {
        const Eigen::VectorXd y = x + alpha * dx;
        const double delta = barrier_delta(problem, s, x, y, gvals);
        if (delta <= 0.25 * alpha * slope) {
          x = y;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++steps;
      if (!moved) break;  // no further progress at this precision
    }
    if (status == SolveStatus::MaxIterations) break;
    if (static_cast<double>(m) / s <= options.tol) break;
    s *= options.barrier_growth;
  }

  const auto& coeffs = problem.coeffs;
  const Index N = coeffs.num_users();
  SolveOutcome out;
  out.scheme = problem.scheme;
  out.direction = problem.direction;
  out.iterations = steps;
  out.status = status;
  out.x = x;
  out.eta = Eigen::VectorXd::Zero(N);
  out.targets = Eigen::VectorXd::Zero(N);
  for (Index u = 0; u < N; ++u) {
    const Index iv = problem.eta_var[static_cast<std::size_t>(u)];
    if (iv >= 0) out.eta(u) = std::exp(x(iv));
    const Index jt = problem.target_var[static_cast<std::size_t>(u)];
    if (jt >= 0) out.targets(u) = std::exp(x(jt));
  }
  {
    // The max-min optimal faces are not single points; report the minimal-power allocation
    // meeting the targets, where every active SINR equals its target.
    std::vector<Index> act;
    for (Index u = 0; u < N; ++u) {
      if (problem.eta_var[static_cast<std::size_t>(u)] >= 0) act.push_back(u);
    }
    const Eigen::MatrixXd G = coeffs.coupling_matrix();
    const auto eta = act.empty() ? std::nullopt
                                 : minimal_fixed_point(G(act, act), coeffs.a(act), coeffs.d(act),
                                                       out.targets(act));
    if (eta) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(N);
      full(act) = *eta;
      if (within_budget(full, coeffs.direction, coeffs.num_cells, coeffs.users_per_cell)) {
        out.eta = full;
      }
    }
  }
  out.sinr = evaluate_sinr(coeffs, out.eta);
  out.objective = original_objective(problem, out.targets);
  out.log_objective = log_objective(problem, out.targets);
  out.duals = refine_duals(problem, x, s);
  out.constraint_violation = constraint_violation(coeffs, out.eta, out.sinr, out.targets);
  out.kkt_residual = verify_kkt(problem, out).max_residual;
  return out;
}

SolveOutcome solve(const SinrCoefficientSet& coeffs, Scheme scheme, double epsilon,
                   const SolveOptions& options) {
  ProblemOptions po;
  po.epsilon = epsilon;
  return solve(build_problem(coeffs, scheme, po), options);
}

KktReport verify_kkt(const ConvexProblem& problem, const SolveOutcome& outcome) {
  KktReport r;
  if (problem.trivial_zero) return r;
  const auto m = static_cast<Index>(problem.constraints.size());
  if (outcome.duals.size() != m) throw std::invalid_argument("dual vector does not match problem");
  if (outcome.x.size() != problem.num_vars) {
    throw std::invalid_argument("outcome point does not match problem");
  }
  const Eigen::VectorXd& x = outcome.x;
  if (!x.allFinite()) {
    r.stationarity = r.primal = r.max_residual = kInf;
    return r;
  }

  const Eigen::VectorXd gobj = problem.objective_gradient(x);
  Eigen::VectorXd res = gobj;
  Eigen::VectorXd gl;
  std::vector<double> w;
  for (Index i = 0; i < m; ++i) {
    const auto& c = problem.constraints[static_cast<std::size_t>(i)];
    const double g = lse_eval(c, x, w, gl);
    const double lam = outcome.duals(i);
    for (std::size_t a = 0; a < c.vars.size(); ++a) res(c.vars[a]) -= lam * gl(static_cast<Index>(a));
    r.primal = std::max(r.primal, g);
    r.dual = std::max(r.dual, -lam);
    r.complementarity = std::max(r.complementarity, std::abs(lam * g));
  }
  r.stationarity = res.lpNorm<Eigen::Infinity>() / (1.0 + gobj.lpNorm<Eigen::Infinity>());
  r.max_residual = std::max({r.stationarity, r.primal, r.dual, r.complementarity});
  return r;
}

BisectionResult bisection_nwmmf(const SinrCoefficientSet& coeffs, double rel_tol,
                                int max_bisections) {
  coeffs.validate();
  if ((coeffs.a.array() <= 0).any()) throw std::invalid_argument("bisection requires all a > 0");
  const Index L = coeffs.num_cells;
  const Index K = coeffs.users_per_cell;
  const Eigen::MatrixXd G = coeffs.coupling_matrix();

  double lo = 0.0;
  double hi = kInf;
  for (Index u = 0; u < coeffs.num_users(); ++u) {
    hi = std::min(hi, coeffs.a(u) / (G(u, u) + coeffs.d(u)));
  }
  BisectionResult r;
  Eigen::VectorXd best;
  const auto feasible = [&](double t) -> std::optional<Eigen::VectorXd> {
    auto eta = minimal_fixed_point(G, coeffs.a, coeffs.d, Eigen::VectorXd::Constant(L * K, t));
    if (eta && within_budget(*eta, coeffs.direction, L, K)) return eta;
    return std::nullopt;
  };
  if (auto eta = feasible(hi)) {
    lo = hi;
    best = *eta;
  }
  while (hi - lo > rel_tol * hi) {
    if (r.iterations++ >= max_bisections) {
      throw std::runtime_error("bisection did not reach the requested tolerance");
    }
    const double mid = 0.5 * (lo + hi);
    if (auto eta = feasible(mid)) {
      lo = mid;
      best = *eta;
    } else {
      hi = mid;
    }
  }
  r.target = lo;
  r.eta = best.size() ? best : Eigen::VectorXd::Zero(coeffs.num_users());
  r.sinr = evaluate_sinr(coeffs, r.eta);
  r.min_sinr = r.sinr.minCoeff();
  return r;
}

}  // namespace mimopc
