#pragma once
// The explicit inverse of the half-line operator  L w = -w'' + (N-2) w' + (N-1) w
// under the two boundary families
//   dirichlet:  w(0) = 0,  w -> 0 at infinity
//   navier:     w'(0) - (N-1) w(0) = 0,  w -> 0 at infinity
// realized by variation of constants. The two kernel integrals are evaluated
// as fused exponential recurrences
//   F(t) = int_0^t     e^{s-t}       h(s) ds
//   J(t) = int_t^{tmax} e^{(1-N)(s-t)} h(s) ds
// so every stored quantity stays at the decaying scale: the growth factor
// e^{(N-1)t} is never materialized and no overflow can occur for any
// truncation point. In terms of F and J (and I = J(0)):
//   dirichlet:  N w = F + J - e^{-t} I,    N w' = e^{-t} I - F + (N-1) J
//   navier:     N w = F + J,               N w' = -F + (N-1) J
// which makes the t = 0 boundary rows hold exactly in floating point.

#include "khess/function_space.hpp"

namespace khess {

enum class BcFamily { dirichlet, navier };

inline std::string to_string(BcFamily bc) {
  return bc == BcFamily::dirichlet ? "dirichlet" : "navier";
}

inline BcFamily parse_bc(const std::string& s) {
  if (s == "dirichlet") return BcFamily::dirichlet;
  if (s == "navier") return BcFamily::navier;
  throw std::invalid_argument("bc must be dirichlet or navier");
}

namespace detail {

/// Moments m_j = int_0^h sigma^j e^{-c sigma} dsigma for j = 0..5.
/// Series for small |c h| (the closed forms cancel catastrophically there),
/// integration-by-parts recurrence otherwise.
inline std::array<double, 6> exp_moments(double c, double h) {
  std::array<double, 6> m{};
  const double z = c * h;
  if (std::abs(z) < 0.5) {
    for (int j = 0; j < 6; ++j) {
      double term = 1.0 / (j + 1.0);  // p = 0
      double sum = term;
      double pw = 1.0;
      double fact = 1.0;
      for (int p = 1; p < 40; ++p) {
        pw *= -z;
        fact *= p;
        term = pw / (fact * (j + p + 1.0));
        sum += term;
        if (std::abs(term) < 1e-20 * std::abs(sum)) break;
      }
      m[static_cast<std::size_t>(j)] = sum * std::pow(h, j + 1.0);
    }
    return m;
  }
  const double emz = std::exp(-z);
  m[0] = -std::expm1(-z) / c;
  double hj = 1.0;
  for (int j = 1; j < 6; ++j) {
    hj *= h;
    m[static_cast<std::size_t>(j)] =
        (j * m[static_cast<std::size_t>(j - 1)] - hj * emz) / c;
  }
  return m;
}

/// Quadrature weights for int_0^h e^{-c sigma} p(sigma) dsigma where p is the
/// polynomial interpolant through nodes at the given offsets (relative to the
/// cell start). Exact for polynomials of degree < off.size(); at most six
/// nodes (the moment table stops there).
inline std::vector<double> weighted_cell_weights(double c, double h,
                                                 const std::vector<double>& off) {
  const std::size_t m = off.size();
  if (m < 2 || m > 6)
    throw std::invalid_argument("weighted_cell_weights: need 2..6 stencil nodes");
  const auto mom = exp_moments(c, h);
  std::vector<double> w(m);
  std::vector<double> coef(m);
  for (std::size_t i = 0; i < m; ++i) {
    // Build the power-basis coefficients of the Lagrange basis l_i.
    std::fill(coef.begin(), coef.end(), 0.0);
    coef[0] = 1.0;
    std::size_t deg = 0;
    double denom = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      // multiply by (sigma - off[j])
      for (std::size_t d = deg + 1; d > 0; --d)
        coef[d] = (d <= deg ? coef[d] : 0.0) * (-off[j]) + coef[d - 1];
      coef[0] *= -off[j];
      ++deg;
      denom *= off[i] - off[j];
    }
    double s = 0.0;
    for (std::size_t d = 0; d <= deg; ++d) s += coef[d] * mom[d];
    w[i] = s / denom;
  }
  return w;
}

/// Per-cell integrals S_k = int_{t_k}^{t_{k+1}} e^{-c (s - t_k)} f(s) ds,
/// k = 0..n-2, via the degree-(m-1) interpolant through the m nearest nodes,
/// m = min(6, n). Sixth-order accurate in the spacing on ordinary grids.
inline std::vector<double> weighted_cell_integrals(const Grid& g,
                                                   const std::vector<double>& f,
                                                   double c) {
  const int n = g.n;
  const double h = g.h;
  const int m = std::min(6, n);
  // Geometry d = s0 - k (stencil start relative to the cell) runs over
  // [2-m, 0]; precompute the weight row for each.
  std::vector<std::vector<double>> wtab(static_cast<std::size_t>(m - 1));
  std::vector<double> off(static_cast<std::size_t>(m));
  for (int d = 2 - m; d <= 0; ++d) {
    for (int i = 0; i < m; ++i) off[static_cast<std::size_t>(i)] = (d + i) * h;
    wtab[static_cast<std::size_t>(-d)] = weighted_cell_weights(c, h, off);
  }
  std::vector<double> cells(static_cast<std::size_t>(n - 1));
  for (int k = 0; k + 1 < n; ++k) {
    const int s0 = std::clamp(k - (m / 2 - 1), 0, n - m);
    const auto& w = wtab[static_cast<std::size_t>(k - s0)];
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      s += w[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(s0 + i)];
    cells[static_cast<std::size_t>(k)] = s;
  }
  return cells;
}

}  // namespace detail

/// F(t_k) = int_0^{t_k} e^{s - t_k} h(s) ds, stepped cell by cell so the
/// stored values stay bounded by sup|h|.
inline std::vector<double> fused_forward_kernel(const Grid& g, const std::vector<double>& h) {
  // F_{k+1} = e^{-h} (F_k + C_k) with C_k = int_0^{dt} e^{sigma} h(t_k + sigma) dsigma.
  const auto cells = detail::weighted_cell_integrals(g, h, -1.0);
  const double decay = std::exp(-g.h);
  std::vector<double> F(static_cast<std::size_t>(g.n), 0.0);
  for (int k = 0; k + 1 < g.n; ++k)
    F[static_cast<std::size_t>(k + 1)] =
        decay * (F[static_cast<std::size_t>(k)] + cells[static_cast<std::size_t>(k)]);
  return F;
}

/// J(t_k) = int_{t_k}^{t_max} e^{(1-N)(s - t_k)} h(s) ds, stepped backward.
inline std::vector<double> fused_backward_kernel(const Grid& g, const std::vector<double>& h, int N) {
  const double c = static_cast<double>(N - 1);
  const auto cells = detail::weighted_cell_integrals(g, h, c);
  const double decay = std::exp(-c * g.h);
  std::vector<double> J(static_cast<std::size_t>(g.n), 0.0);
  for (int k = g.n - 2; k >= 0; --k)
    J[static_cast<std::size_t>(k)] =
        decay * J[static_cast<std::size_t>(k + 1)] + cells[static_cast<std::size_t>(k)];
  return J;
}

/// Result of one linear solve. `w` carries the closed-form derivative. The
/// fused kernels and I = J(0) are retained because downstream consumers
/// (radial reconstruction, stable residual evaluation) need them; rebuilding
/// the third radial derivative from anything else cancels catastrophically
/// near r = e^{-t_max}. `tail_error` is the error bar for reading w as the
/// infinite-domain solution: the boundary residue |w(t_max)| plus an a-priori
/// bound on the neglected kernel tail.
struct LinearSolveResult {
  GridFunction w;
  double residual_sup = 0.0;
  double tail_error = 0.0;
  std::vector<double> fused_forward;   ///< F(t_k)
  std::vector<double> fused_backward;  ///< J(t_k)
  double i_infinity = 0.0;             ///< I = J(0) = int_0^{t_max} e^{(1-N)s} h ds
};

/// Node-wise L w = -w'' + (N-2) w' + (N-1) w, with w'' formed by fourth-order
/// differencing of the (analytic) first-derivative samples; the boundary
/// nodes use one-sided stencils of the same order.
inline GridFunction apply_forward(const GridFunction& w, int N) {
  if (N != 2 && N != 3) throw std::invalid_argument("apply_forward: N must be 2 or 3");
  if (!w.has_deriv()) throw std::invalid_argument("apply_forward: w needs derivative samples");
  const auto w2 = detail::differentiate4(w.deriv, w.grid->h);
  GridFunction out;
  out.grid = w.grid;
  out.values.resize(w.values.size());
  for (std::size_t k = 0; k < w.values.size(); ++k)
    out.values[k] = -w2[k] + (N - 2.0) * w.deriv[k] + (N - 1.0) * w.values[k];
  return out;
}

/// Sup over interior nodes of |L w - h|: an honest discretization check that
/// the quadrature-built w solves the equation (the boundary nodes, where the
/// differencing is one-sided, are excluded).
inline double linear_residual(const GridFunction& w, const GridFunction& h, int N) {
  if (!grids_match(w.grid, h.grid)) throw std::invalid_argument("residual: grid mismatch");
  const GridFunction Lw = apply_forward(w, N);
  double m = 0.0;
  for (std::size_t k = 1; k + 1 < Lw.values.size(); ++k)
    m = std::max(m, std::abs(Lw.values[k] - h.values[k]));
  return m;
}

inline double residual(const LinearSolveResult& res, const GridFunction& h, int N) {
  return linear_residual(res.w, h, N);
}

/// Apply the inverse operator. Requires the right-hand side to decay fast
/// enough that the truncated backward kernel is trustworthy; the concrete
/// check is |e^{(1-N) t_max} h(t_max)| <= 1e-8, which admits every bounded h
/// on default grids and rejects exponentially growing input.
inline LinearSolveResult apply_inverse(const GridFunction& h, int N, BcFamily bc) {
  if (N != 2 && N != 3) throw std::invalid_argument("apply_inverse: N must be 2 or 3");
  check_finite(h.values, "apply_inverse");
  const Grid& g = *h.grid;
  if (std::abs(std::exp((1.0 - N) * g.t_max) * h.values.back()) > 1e-8)
    throw std::invalid_argument("apply_inverse: right-hand side fails the decay check");

  LinearSolveResult out;
  out.fused_forward = fused_forward_kernel(g, h.values);
  out.fused_backward = fused_backward_kernel(g, h.values, N);
  out.i_infinity = out.fused_backward.front();

  const double invN = 1.0 / static_cast<double>(N);
  std::vector<double> w(h.values.size()), dw(h.values.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double F = out.fused_forward[k];
    const double J = out.fused_backward[k];
    if (bc == BcFamily::dirichlet) {
      const double EI = std::exp(-g.nodes[k]) * out.i_infinity;
      w[k] = (F + J - EI) * invN;
      dw[k] = (EI - F + (N - 1.0) * J) * invN;
    } else {
      w[k] = (F + J) * invN;
      dw[k] = (-F + (N - 1.0) * J) * invN;
    }
  }
  out.w = make_function(h.grid, std::move(w), std::move(dw), true);
  out.tail_error = std::abs(out.w.values.back()) +
                   std::abs(h.values.back()) / (N * (N - 1.0));
  out.residual_sup = residual(out, h, N);
  return out;
}

}  // namespace khess
