// Independent cross-check by direct integration: the initial-value dichotomy,
// bisection for the decaying trajectory, and agreement with the fixed-point
// solver.
#include <catch2/catch_amalgamated.hpp>

#include "khess/picard.hpp"
#include "khess/shooting.hpp"

#include <cmath>

using namespace khess;

namespace {

ForcingProfile unit_profile(int N) {
  return h1_eval(load_datum("one"), N, make_grid(40.0, 4001));
}

double trajectory_gap(const ShootResult& r, const Solution& s, double t_lim) {
  const Grid& g = *s.w.grid;
  double gap = 0.0;
  for (std::size_t k = 0; k < s.w.values.size(); ++k)
    if (g.nodes[k] <= t_lim)
      gap = std::max(gap,
                     std::abs(r.trajectory.values[k] - s.w.values[k]));
  return gap;
}

}  // namespace

TEST_CASE("the zero problem shoots to the zero trajectory", "[shooting]") {
  const ForcingProfile p = unit_profile(2);
  const ShootResult r = shoot(0.0, 0.0, p, 2, BcFamily::dirichlet);
  REQUIRE(r.outcome == ShootOutcome::decayed);
  REQUIRE(sup_abs(r.trajectory.values) == 0.0);
  REQUIRE(sup_abs(r.trajectory.deriv) == 0.0);
  REQUIRE(r.final_value == 0.0);

  const auto init = find_decaying(0.0, p, 2, BcFamily::dirichlet);
  REQUIRE(init.has_value());
  REQUIRE(std::abs(*init) <= 1e-12);
}

TEST_CASE("an initial value above the separatrix escapes upward", "[shooting]") {
  const ForcingProfile p = unit_profile(2);
  const double cutoff = 1e6;
  const ShootResult r = shoot(0.034, 0.1, p, 2, BcFamily::dirichlet, cutoff);
  REQUIRE(r.outcome == ShootOutcome::blew_up);
  REQUIRE(r.blow_sign == 1);
  REQUIRE(r.blowup_time.has_value());
  REQUIRE(*r.blowup_time > 0.0);
  REQUIRE(*r.blowup_time < 40.0);
  // Nodes beyond the crossing are clamped to the cutoff.
  REQUIRE(r.trajectory.values.back() == cutoff);
  REQUIRE(sup_abs(r.trajectory.values) == cutoff);
}

TEST_CASE("shoot validates its arguments", "[shooting]") {
  const ForcingProfile p = unit_profile(2);
  REQUIRE_THROWS_AS(shoot(0.0, 0.1, p, 3, BcFamily::dirichlet),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      shoot(std::numeric_limits<double>::quiet_NaN(), 0.1, p, 2,
            BcFamily::dirichlet),
      std::invalid_argument);
}

TEST_CASE("bisection lands on the solver's initial values", "[shooting]") {
  struct Case {
    int N;
    BcFamily bc;
    double key;     // fixed-point initial value at n = 4001, t_max = 40
    double t_agree; // window for trajectory agreement with the grid solution
  };
  const Case cases[] = {
      {2, BcFamily::dirichlet, 0.03334260172907047, 20.0},
      {2, BcFamily::navier, 0.016702707880322028, 20.0},
      {3, BcFamily::dirichlet, 0.033351145417187686, 10.0},
      {3, BcFamily::navier, 0.011135255755336042, 10.0},
  };
  const double lambda = 0.1;
  for (const Case& c : cases) {
    CAPTURE(c.N, to_string(c.bc));
    const ForcingProfile p = unit_profile(c.N);
    const auto init = find_decaying(lambda, p, c.N, c.bc);
    REQUIRE(init.has_value());
    REQUIRE(std::abs(*init - c.key) <= 5e-14);

    // The bisected value sits under the linear envelope: above the necessary
    // bound's slope c' lambda minus rounding, below it plus the quadratic
    // correction.
    const double cp = necessary_bound(p, c.N, c.bc);
    const BoundsReport rep = nonexistence_threshold(p, c.N, c.bc);
    REQUIRE(*init >= cp * lambda - 1e-9);
    REQUIRE(*init <= cp * lambda + 2.0 * lambda * lambda * rep.c_const);

    // The shot trajectory tracks the grid solution while the parasitic
    // e^{(N-1)t} mode stays under the tolerance.
    PicardConfig cfg;
    cfg.lambda = lambda;
    const Solution s = solve_picard(cfg, p, c.bc, c.N);
    REQUIRE(s.converged);
    const ShootResult r = shoot(*init, lambda, p, c.N, c.bc);
    REQUIRE(trajectory_gap(r, s, c.t_agree) <= 1e-6);
  }
}

TEST_CASE("the dichotomy in the initial value is monotone", "[shooting]") {
  const ForcingProfile p = unit_profile(2);
  const double lambda = 0.1;
  const auto sep = find_decaying(lambda, p, 2, BcFamily::dirichlet);
  REQUIRE(sep.has_value());

  for (double offset : {1e-4, 1e-2}) {
    CAPTURE(offset);
    const ShootResult above =
        shoot(*sep + offset, lambda, p, 2, BcFamily::dirichlet);
    REQUIRE(above.outcome == ShootOutcome::blew_up);
    REQUIRE(above.blow_sign == 1);
    const ShootResult below =
        shoot(*sep - offset, lambda, p, 2, BcFamily::dirichlet);
    REQUIRE(below.outcome == ShootOutcome::blew_up);
    REQUIRE(below.blow_sign == -1);
  }
}

TEST_CASE("a hair above the separatrix stays inconclusive at the horizon",
          "[shooting]") {
  // The upward escape of a 1e-14 offset grows like e^{(N-1)t} and reaches
  // only ~1e-14 e^{40} ~ 2e3 by t_max for N = 2: past the decay tolerance,
  // short of the cutoff.
  const ForcingProfile p = unit_profile(2);
  const auto sep = find_decaying(0.1, p, 2, BcFamily::dirichlet);
  REQUIRE(sep.has_value());
  const ShootResult r = shoot(*sep + 1e-14, 0.1, p, 2, BcFamily::dirichlet);
  REQUIRE(r.outcome == ShootOutcome::inconclusive);
  REQUIRE(r.final_value > 1e-6);
  REQUIRE(r.final_value < 1e6);

  // For N = 3 the same offset amplifies like e^{2t} and does cross the cutoff.
  const ForcingProfile q = unit_profile(3);
  const auto sep3 = find_decaying(0.1, q, 3, BcFamily::dirichlet);
  REQUIRE(sep3.has_value());
  const ShootResult r3 = shoot(*sep3 + 1e-14, 0.1, q, 3, BcFamily::dirichlet);
  REQUIRE(r3.outcome == ShootOutcome::blew_up);
  REQUIRE(r3.blow_sign == 1);
}

TEST_CASE("no decaying trajectory exists above the certified multiplier",
          "[shooting]") {
  const ForcingProfile p2 = unit_profile(2);
  REQUIRE_FALSE(find_decaying(396.0, p2, 2, BcFamily::dirichlet).has_value());
  REQUIRE_FALSE(find_decaying(400.0, p2, 2, BcFamily::dirichlet).has_value());
  const ForcingProfile p3 = unit_profile(3);
  REQUIRE_FALSE(find_decaying(210.0, p3, 3, BcFamily::dirichlet).has_value());
}
