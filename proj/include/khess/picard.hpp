#pragma once
// Contraction-mapping solver for the half-line problem
//   L w = N(w) + lambda h1,   N(w) = ((N-1)/2) e^{-t} w^2
// iterated as w_{k+1} = L^{-1}(N(w_k) + lambda h1) from the linear seed
// w_0 = lambda L^{-1} h1, inside the ball of center w_0 and radius rho.
// Divergence (ball exit or step growth past max_iter) is a reported outcome,
// not an exception: the solver is also used to probe where contraction fails.

#include "khess/datum.hpp"
#include "khess/green_operator.hpp"

namespace khess {

struct PicardConfig {
  double tol = 1e-12;   ///< mu-norm step tolerance
  int max_iter = 200;
  double rho = 0.0;     ///< ball radius; <= 0 selects 2*||w0||_mu + tol
  double lambda = 0.0;
};

/// A solver outcome. `w` carries the closed-form first derivative; `w_deriv`
/// holds the same derivative samples as values, with ITS derivative slot
/// filled by the second derivative obtained from the kernel identity
/// w'' = (N-1) J - rhs - w' (never by differencing), so downstream radial
/// reconstruction stays exact at the deep-tail nodes.
struct Solution {
  GridFunction w;
  GridFunction w_deriv;
  double mu_norm = 0.0;
  double residual_sup = 0.0;
  int iterations = 0;
  std::vector<double> contraction_ratios;
  bool converged = false;
  BcFamily bc = BcFamily::dirichlet;
  int N = 2;
  double lambda = 0.0;
  // Internals retained for reconstruction and diagnostics.
  GridFunction rhs;                    ///< right-hand side of the final linear solve
  std::vector<double> fused_backward;  ///< J(t_k) of the final linear solve
  double ball_radius = 0.0;
  std::string note;
};

/// N(w) = ((N-1)/2) e^{-t} w^2 node-wise; the derivative slot is filled from
/// the product rule when w carries one.
inline GridFunction nonlinearity(const GridFunction& w, int N) {
  if (N != 2 && N != 3) throw std::invalid_argument("nonlinearity: N must be 2 or 3");
  const double c = (N - 1) / 2.0;
  GridFunction out;
  out.grid = w.grid;
  out.values.resize(w.values.size());
  for (std::size_t k = 0; k < w.values.size(); ++k)
    out.values[k] = c * std::exp(-w.grid->nodes[k]) * w.values[k] * w.values[k];
  if (w.has_deriv()) {
    out.deriv.resize(w.values.size());
    for (std::size_t k = 0; k < w.values.size(); ++k)
      out.deriv[k] = c * std::exp(-w.grid->nodes[k]) *
                     (2.0 * w.values[k] * w.deriv[k] - w.values[k] * w.values[k]);
    out.deriv_analytic = w.deriv_analytic;
  }
  return out;
}

namespace detail {

/// Package a linear solve as a Solution, filling the second-derivative slot
/// through the identity w'' = -rhs + (N-1)*J + ... in its stable grouped form
/// w'' + w' = (N-1) J - rhs  =>  w'' = (N-1) J - rhs - w'.
inline Solution package_solution(LinearSolveResult&& lin, GridFunction rhs, int N,
                                 BcFamily bc, double lambda) {
  Solution s;
  s.N = N;
  s.bc = bc;
  s.lambda = lambda;
  s.w = std::move(lin.w);
  s.w_deriv.grid = s.w.grid;
  s.w_deriv.values = s.w.deriv;
  s.w_deriv.deriv.resize(s.w.deriv.size());
  for (std::size_t k = 0; k < s.w.deriv.size(); ++k)
    s.w_deriv.deriv[k] =
        (N - 1.0) * lin.fused_backward[k] - rhs.values[k] - s.w.deriv[k];
  s.w_deriv.deriv_analytic = true;
  s.rhs = std::move(rhs);
  s.fused_backward = std::move(lin.fused_backward);
  s.mu_norm = norm(s.w, NormKind::mu, N);
  return s;
}

}  // namespace detail

/// w0 = lambda * L^{-1} h1: the zero-nonlinearity solve that seeds the
/// iteration (and doubles as the lower solution of the monotone method).
/// Its residual_sup measures the LINEAR equation L w0 = lambda h1.
inline Solution linear_seed(double lambda, const ForcingProfile& p, BcFamily bc) {
  GridFunction rhs = p.h1;
  for (double& v : rhs.values) v *= lambda;
  if (!rhs.deriv.empty())
    for (double& v : rhs.deriv) v *= lambda;
  auto lin = apply_inverse(rhs, p.N, bc);
  Solution s = detail::package_solution(std::move(lin), std::move(rhs), p.N, bc, lambda);
  s.converged = true;
  s.iterations = 0;
  s.residual_sup = linear_residual(s.w, s.rhs, p.N);
  s.note = "linear seed";
  return s;
}

/// One iteration of the map phi -> L^{-1}(N(phi) + lambda h1).
inline GridFunction picard_step(const GridFunction& phi, double lambda,
                                const ForcingProfile& p, BcFamily bc) {
  check_finite(phi.values, "picard_step");
  GridFunction rhs = nonlinearity(phi, p.N);
  for (std::size_t k = 0; k < rhs.values.size(); ++k)
    rhs.values[k] += lambda * p.h1.values[k];
  rhs.deriv.clear();
  rhs.deriv_analytic = false;
  return apply_inverse(rhs, p.N, bc).w;
}

/// Residual of a candidate solution against the full nonlinear equation:
/// sup over interior nodes of |L w - N(w) - lambda h1|, with L w formed by
/// fourth-order differencing of the analytic first derivative.
inline double nonlinear_residual(const Solution& s, const ForcingProfile& p) {
  const GridFunction Lw = apply_forward(s.w, s.N);
  const GridFunction Nw = nonlinearity(s.w, s.N);
  double m = 0.0;
  for (std::size_t k = 1; k + 1 < Lw.values.size(); ++k)
    m = std::max(m, std::abs(Lw.values[k] - Nw.values[k] -
                             s.lambda * p.h1.values[k]));
  return m;
}

inline Solution solve_picard(const PicardConfig& cfg, const ForcingProfile& p,
                             BcFamily bc, int N) {
  if (N != p.N)
    throw std::invalid_argument("solve_picard: N disagrees with the forcing profile");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("solve_picard: tol must be positive");
  if (cfg.max_iter < 1) throw std::invalid_argument("solve_picard: max_iter must be >= 1");

  Solution seed = linear_seed(cfg.lambda, p, bc);
  const double rho = cfg.rho > 0.0 ? cfg.rho : 2.0 * seed.mu_norm + cfg.tol;

  Solution cur = seed;
  double prev_step = -1.0;
  std::vector<double> ratios;
  int iter = 0;
  bool converged = false;
  std::string note;

  while (iter < cfg.max_iter) {
    ++iter;
    GridFunction rhs = nonlinearity(cur.w, N);
    for (std::size_t k = 0; k < rhs.values.size(); ++k)
      rhs.values[k] += cfg.lambda * p.h1.values[k];
    rhs.deriv.clear();
    rhs.deriv_analytic = false;
    auto lin = apply_inverse(rhs, N, bc);
    Solution next =
        detail::package_solution(std::move(lin), std::move(rhs), N, bc, cfg.lambda);

    const double step = norm(subtract(next.w, cur.w), NormKind::mu, N);
    if (prev_step > 0.0) ratios.push_back(step / prev_step);
    prev_step = step;
    cur = std::move(next);

    const double dist = norm(subtract(cur.w, seed.w), NormKind::mu, N);
    if (dist > rho) {
      note = "diverged: iterate left the ball of radius " + std::to_string(rho);
      break;
    }
    if (step <= cfg.tol) {
      converged = true;
      break;
    }
  }
  if (!converged && note.empty())
    note = "did not converge within max_iter";

  cur.iterations = iter;
  cur.contraction_ratios = std::move(ratios);
  cur.ball_radius = rho;
  cur.residual_sup = nonlinear_residual(cur, p);
  cur.converged = converged && cur.residual_sup <= 1e-6;
  if (converged && !cur.converged)
    note = "step tolerance met but equation residual above 1e-6";
  cur.note = note;
  return cur;
}

}  // namespace khess
