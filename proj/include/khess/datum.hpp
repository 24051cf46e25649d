#pragma once
// Representation of the integrable datum g on [0,1], its cumulative integral
// G(x) = int_0^x g, and the transformed forcing profile
// h1(t) = e^{(N-3)t} G(e^{-t}) that drives the half-line equation.
//
// Only G ever enters the pipeline, so sampled data are interpreted as
// piecewise linear (their cumulative integral is exact and continuous);
// builtins (constant, power, indicator) carry closed-form cumulatives.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "khess/function_space.hpp"

namespace khess {

struct Datum {
  enum class Kind { one, zero, power, indicator, sampled };
  Kind kind = Kind::zero;
  double a = 0.0;          ///< power exponent, or indicator lower edge
  double b = 0.0;          ///< indicator upper edge
  std::vector<double> xs;  ///< sample abscissae (sampled kind)
  std::vector<double> gs;  ///< sample values (sampled kind)
  std::vector<double> cum; ///< exact cumulative at the sample abscissae
  double l1_norm = 0.0;    ///< ||g||_{L^1(0,1)}
  double mass = 0.0;       ///< G(1) = int_0^1 g (signed)
  bool nonneg = true;      ///< g >= 0 by representation
  std::string label;       ///< normalized source string, e.g. "one", "power:0.5"

  /// G(x) = int_0^x g for x in [0,1]. Outside the sampled range g is taken
  /// to be zero.
  double cumulative(double x) const {
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("Datum::cumulative: x must lie in [0,1]");
    switch (kind) {
      case Kind::zero: return 0.0;
      case Kind::one: return x;
      case Kind::power: return std::pow(x, a + 1.0) / (a + 1.0);
      case Kind::indicator: return std::max(0.0, std::min(x, b) - a);
      case Kind::sampled: {
        if (x <= xs.front()) return 0.0;
        if (x >= xs.back()) return cum.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        const double dx = xs[i + 1] - xs[i];
        const double s = x - xs[i];
        const double slope = (gs[i + 1] - gs[i]) / dx;
        return cum[i] + gs[i] * s + 0.5 * slope * s * s;
      }
    }
    throw std::logic_error("Datum::cumulative: unknown kind");
  }
};

namespace detail {

/// Exact L^1 mass of one linear segment (splits at an interior sign change).
inline double segment_abs_integral(double g0, double g1, double dx) {
  if (g0 == 0.0 && g1 == 0.0) return 0.0;
  if (g0 * g1 >= 0.0) return 0.5 * (std::abs(g0) + std::abs(g1)) * dx;
  const double xc = dx * g0 / (g0 - g1);  // zero crossing inside the cell
  return 0.5 * (std::abs(g0) * xc + std::abs(g1) * (dx - xc));
}

inline Datum finalize_samples(std::vector<double> xs, std::vector<double> gs,
                              std::string label) {
  if (xs.empty()) throw std::invalid_argument("load_datum: empty sample table");
  if (xs.size() != gs.size())
    throw std::invalid_argument("load_datum: malformed sample table");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= 0.0 && xs[i] <= 1.0))
      throw std::invalid_argument("load_datum: sample abscissa outside [0,1]");
    if (!std::isfinite(gs[i]))
      throw std::invalid_argument("load_datum: non-finite sample value");
    if (i > 0 && !(xs[i] > xs[i - 1]))
      throw std::invalid_argument("load_datum: sample abscissae must be strictly increasing");
  }
  Datum d;
  d.kind = Datum::Kind::sampled;
  d.xs = std::move(xs);
  d.gs = std::move(gs);
  d.label = std::move(label);
  d.cum.assign(d.xs.size(), 0.0);
  d.nonneg = true;
  d.l1_norm = 0.0;
  for (std::size_t i = 0; i + 1 < d.xs.size(); ++i) {
    const double dx = d.xs[i + 1] - d.xs[i];
    d.cum[i + 1] = d.cum[i] + 0.5 * (d.gs[i] + d.gs[i + 1]) * dx;
    d.l1_norm += segment_abs_integral(d.gs[i], d.gs[i + 1], dx);
  }
  for (double g : d.gs)
    if (g < 0.0) d.nonneg = false;
  d.mass = d.cum.back();
  return d;
}

inline Datum load_datum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("load_datum: cannot open file " + path);
  std::vector<double> xs, gs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, g;
    if (!(row >> x >> g)) {
      if (first) { first = false; continue; }  // optional header line
      throw std::invalid_argument("load_datum: malformed row in " + path);
    }
    first = false;
    xs.push_back(x);
    gs.push_back(g);
  }
  return finalize_samples(std::move(xs), std::move(gs), "csv:" + path);
}

}  // namespace detail

/// Load from a sample table (piecewise-linear interpretation).
inline Datum load_datum(const std::vector<std::pair<double, double>>& samples) {
  std::vector<double> xs, gs;
  xs.reserve(samples.size());
  gs.reserve(samples.size());
  for (const auto& [x, g] : samples) {
    xs.push_back(x);
    gs.push_back(g);
  }
  return detail::finalize_samples(std::move(xs), std::move(gs), "samples");
}

/// Load from a source string: one | zero | power:a (a > -1) | indicator:a,b
/// (0 <= a < b <= 1) | csv:PATH (two columns x,g; header optional).
inline Datum load_datum(const std::string& source) {
  Datum d;
  if (source == "one") {
    d.kind = Datum::Kind::one;
    d.l1_norm = 1.0;
    d.mass = 1.0;
    d.nonneg = true;
    d.label = "one";
    return d;
  }
  if (source == "zero") {
    d.kind = Datum::Kind::zero;
    d.l1_norm = 0.0;
    d.mass = 0.0;
    d.nonneg = true;
    d.label = "zero";
    return d;
  }
  if (source.rfind("power:", 0) == 0) {
    d.kind = Datum::Kind::power;
    d.a = std::stod(source.substr(6));
    if (!(d.a > -1.0)) throw std::invalid_argument("load_datum: power exponent must exceed -1");
    d.l1_norm = 1.0 / (d.a + 1.0);
    d.mass = d.l1_norm;
    d.nonneg = true;
    d.label = source;
    return d;
  }
  if (source.rfind("indicator:", 0) == 0) {
    const std::string body = source.substr(10);
    const auto comma = body.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("load_datum: indicator needs two edges a,b");
    d.kind = Datum::Kind::indicator;
    d.a = std::stod(body.substr(0, comma));
    d.b = std::stod(body.substr(comma + 1));
    if (!(0.0 <= d.a && d.a < d.b && d.b <= 1.0))
      throw std::invalid_argument("load_datum: indicator edges need 0 <= a < b <= 1");
    d.l1_norm = d.b - d.a;
    d.mass = d.l1_norm;
    d.nonneg = true;
    d.label = source;
    return d;
  }
  if (source.rfind("csv:", 0) == 0) return detail::load_datum_csv(source.substr(4));
  throw std::invalid_argument("load_datum: unknown source '" + source + "'");
}

// ---------------------------------------------------------------------------
// Forcing profile
// ---------------------------------------------------------------------------

/// h1 sampled on a grid together with the datum facts downstream modules
/// need: the dimension, the sign hypothesis (g >= 0 by representation), the
/// L^1 norm of g (uniform bound for |h1|), and the mass G(1) (the positive-
/// mass hypothesis of the non-existence analysis). Carries a copy of the
/// datum so threshold computations can re-sample on refined grids.
struct ForcingProfile {
  GridFunction h1;
  int N = 2;
  bool sign_nonneg = true;
  double g_l1 = 0.0;
  double g_mass = 0.0;
  Datum datum;
};

/// h1(t_k) = e^{(N-3) t_k} G(e^{-t_k}).
inline ForcingProfile h1_eval(const Datum& d, int N, const GridPtr& grid) {
  if (N != 2 && N != 3) throw std::invalid_argument("h1_eval: N must be 2 or 3");
  if (!grid) throw std::invalid_argument("h1_eval: null grid");
  ForcingProfile p;
  p.N = N;
  p.sign_nonneg = d.nonneg;
  p.g_l1 = d.l1_norm;
  p.g_mass = d.mass;
  p.datum = d;
  std::vector<double> v(grid->nodes.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double t = grid->nodes[k];
    v[k] = std::exp((N - 3.0) * t) * d.cumulative(std::exp(-t));
  }
  p.h1 = make_function(grid, std::move(v));
  return p;
}

/// int_0^{t_max} |h1|. The uniform bound |h1(t)| <= ||g||_{L^1(0,1)} makes h1
/// integrable on the half-line for N = 2; for N = 3 that argument does not
/// apply, so the call is rejected there.
inline double h1_l1_norm(const ForcingProfile& p) {
  if (p.N != 2)
    throw std::invalid_argument("h1_l1_norm: defined for N = 2 only");
  return norm(p.h1, NormKind::l1);
}

}  // namespace khess
