// The linear half-line solve and its inverse/forward consistency.
#include <catch2/catch_amalgamated.hpp>

#include "khess/green_operator.hpp"

#include <cmath>
#include <random>

using namespace khess;

namespace {

GridFunction decaying_exponential(const GridPtr& g) {
  return sample(g, [](double t) { return std::exp(-t); },
                [](double t) { return -std::exp(-t); });
}

/// Random smooth nonnegative right-hand side with decay, reproducibly seeded.
GridFunction random_nonneg_rhs(const GridPtr& g, std::mt19937& rng) {
  std::uniform_real_distribution<double> amp(0.1, 2.0), freq(0.3, 3.0),
      rate(0.5, 2.0), center(1.0, 10.0), width(0.5, 3.0);
  const double a = amp(rng), omega = freq(rng), b = rate(rng);
  const double c = amp(rng), t0 = center(rng), s = width(rng);
  const double q = rate(rng);
  return sample(g, [=](double t) {
    const double bump = c * std::exp(-(t - t0) * (t - t0) / (2.0 * s * s));
    return a * std::abs(std::sin(omega * t)) * std::exp(-b * t) + bump +
           std::exp(-q * t);
  });
}

}  // namespace

TEST_CASE("the inverse reproduces closed forms for an exponential load",
          "[green_operator]") {
  const GridPtr g = make_grid(40.0, 4001);
  const GridFunction h = decaying_exponential(g);

  struct Case {
    int N;
    BcFamily bc;
    double slope, shift;  // w = (slope*t + shift) e^{-t}
  };
  const Case cases[] = {
      {2, BcFamily::dirichlet, 0.5, 0.0},
      {2, BcFamily::navier, 0.5, 0.25},
      {3, BcFamily::dirichlet, 1.0 / 3.0, 0.0},
      {3, BcFamily::navier, 1.0 / 3.0, 1.0 / 9.0},
  };
  for (const Case& c : cases) {
    CAPTURE(c.N, to_string(c.bc));
    const LinearSolveResult res = apply_inverse(h, c.N, c.bc);
    double worst = 0.0;
    for (std::size_t k = 0; k < res.w.values.size(); ++k) {
      const double t = g->nodes[k];
      const double exact = (c.slope * t + c.shift) * std::exp(-t);
      worst = std::max(worst, std::abs(res.w.values[k] - exact));
    }
    REQUIRE(worst <= 1e-12);
  }
}

TEST_CASE("boundary rows hold to machine precision", "[green_operator]") {
  const GridPtr g = make_grid(40.0, 4001);
  const GridFunction h = decaying_exponential(g);
  for (int N : {2, 3}) {
    const LinearSolveResult dir = apply_inverse(h, N, BcFamily::dirichlet);
    REQUIRE(dir.w.values.front() == 0.0);
    REQUIRE(std::abs(dir.w.values.back()) <= dir.tail_error);

    const LinearSolveResult nav = apply_inverse(h, N, BcFamily::navier);
    REQUIRE(std::abs(nav.w.deriv.front() - (N - 1.0) * nav.w.values.front()) <=
            1e-12);
    REQUIRE(std::abs(nav.w.values.back()) <= nav.tail_error);
  }
}

TEST_CASE("the solve is linear in the right-hand side", "[green_operator]") {
  const GridPtr g = make_grid(40.0, 2001);
  std::mt19937 rng(12345);
  const GridFunction f1 = random_nonneg_rhs(g, rng);
  const GridFunction f2 = random_nonneg_rhs(g, rng);
  const GridFunction mix = linear_combination(1.7, f1, -0.4, f2);
  for (int N : {2, 3})
    for (BcFamily bc : {BcFamily::dirichlet, BcFamily::navier}) {
      CAPTURE(N, to_string(bc));
      const GridFunction w1 = apply_inverse(f1, N, bc).w;
      const GridFunction w2 = apply_inverse(f2, N, bc).w;
      const GridFunction wmix = apply_inverse(mix, N, bc).w;
      const GridFunction expect = linear_combination(1.7, w1, -0.4, w2);
      REQUIRE(sup_diff(wmix.values, expect.values) <= 1e-10);
    }
}

TEST_CASE("nonnegative loads give nonnegative responses", "[green_operator]") {
  const GridPtr g = make_grid(40.0, 2001);
  std::mt19937 rng(777);
  for (int trial = 0; trial < 5; ++trial) {
    const GridFunction h = random_nonneg_rhs(g, rng);
    for (int N : {2, 3})
      for (BcFamily bc : {BcFamily::dirichlet, BcFamily::navier}) {
        const LinearSolveResult res = apply_inverse(h, N, bc);
        double low = 0.0;
        for (double v : res.w.values) low = std::min(low, v);
        REQUIRE(low >= -1e-12);
      }
  }
}

TEST_CASE("the forward operator undoes the inverse up to differencing error",
          "[green_operator]") {
  const GridPtr g = make_grid(40.0, 4001);
  const GridFunction h = decaying_exponential(g);
  for (int N : {2, 3})
    for (BcFamily bc : {BcFamily::dirichlet, BcFamily::navier}) {
      const LinearSolveResult res = apply_inverse(h, N, bc);
      REQUIRE(res.residual_sup <= 1e-6);
      REQUIRE(linear_residual(res.w, h, N) <= 1e-6);
    }
}

TEST_CASE("the inverse keeps the internal tail identity", "[green_operator]") {
  // w + w' equals the backward kernel at every node, for both families;
  // this is what makes the third radial derivative stably computable later.
  const GridPtr g = make_grid(40.0, 4001);
  const GridFunction h = decaying_exponential(g);
  for (int N : {2, 3})
    for (BcFamily bc : {BcFamily::dirichlet, BcFamily::navier}) {
      const LinearSolveResult res = apply_inverse(h, N, bc);
      double worst = 0.0;
      for (std::size_t k = 0; k < res.w.values.size(); ++k)
        worst = std::max(worst, std::abs(res.w.values[k] + res.w.deriv[k] -
                                         res.fused_backward[k]));
      REQUIRE(worst <= 1e-12);
    }
}

TEST_CASE("solutions have a finite weighted Sobolev norm", "[green_operator]") {
  const GridPtr g = make_grid(40.0, 4001);
  const GridFunction h = decaying_exponential(g);
  for (int N : {2, 3}) {
    const LinearSolveResult res =
        apply_inverse(h, N, BcFamily::dirichlet);
    const double mu = norm(res.w, NormKind::mu, N);
    REQUIRE(std::isfinite(mu));
    REQUIRE(mu > 0.0);
  }
}

TEST_CASE("the forward operator demands derivative samples", "[green_operator]") {
  const GridPtr g = make_grid(10.0, 101);
  const GridFunction f = sample(g, [](double t) { return std::exp(-t); });
  REQUIRE_THROWS_AS(apply_forward(f, 2), std::invalid_argument);
  const GridFunction fd = decaying_exponential(g);
  REQUIRE_THROWS_AS(apply_forward(fd, 4), std::invalid_argument);
}

TEST_CASE("residual evaluation rejects mismatched grids", "[green_operator]") {
  const GridPtr a = make_grid(10.0, 101);
  const GridPtr b = make_grid(10.0, 201);
  const GridFunction w = decaying_exponential(a);
  const GridFunction h = sample(b, [](double t) { return std::exp(-t); });
  REQUIRE_THROWS_AS(linear_residual(w, h, 2), std::invalid_argument);
}

TEST_CASE("growing right-hand sides are rejected by the decay check",
          "[green_operator]") {
  const GridPtr g = make_grid(40.0, 401);
  // The rejection threshold scales with e^{(1-N) t_max} h(t_max), so the
  // three-dimensional case needs growth beyond e^{2t} to trip it.
  const GridFunction grow2 = sample(g, [](double t) { return std::exp(t); });
  REQUIRE_THROWS_AS(apply_inverse(grow2, 2, BcFamily::dirichlet),
                    std::invalid_argument);
  const GridFunction grow3 = sample(g, [](double t) { return std::exp(3.0 * t); });
  REQUIRE_THROWS_AS(apply_inverse(grow3, 3, BcFamily::navier),
                    std::invalid_argument);
}

TEST_CASE("dimension validation on the inverse", "[green_operator]") {
  const GridPtr g = make_grid(10.0, 101);
  const GridFunction h = sample(g, [](double t) { return std::exp(-t); });
  REQUIRE_THROWS_AS(apply_inverse(h, 4, BcFamily::dirichlet),
                    std::invalid_argument);
}
