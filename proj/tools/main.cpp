// Command-line driver for the radial fourth-order solver suite: solve a
// single case, report solvability bounds, or sweep a list of lambdas.
#include "khess/bounds.hpp"
#include "khess/monotone.hpp"
#include "khess/picard.hpp"
#include "khess/reconstruct.hpp"
#include "khess/shooting.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace khess;

// ---------------------------------------------------------------------------
// Formatting: fixed 17-significant-digit floats so identical configurations
// produce byte-identical files.

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string json_num(double x) {
  if (std::isfinite(x)) return fmt17(x);
  if (std::isnan(x)) return "\"nan\"";
  return x > 0 ? "\"+inf\"" : "\"-inf\"";
}

std::string json_str(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::string json_bool(bool b) { return b ? "true" : "false"; }

std::string json_ratio_array(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += json_num(v[k]);
  }
  out += ']';
  return out;
}

/// File-name slug for a datum label: keep [A-Za-z0-9._-], map the rest to '_'.
std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    out += ok ? c : '_';
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Shared configuration.

struct Options {
  int N = 2;
  std::string bc = "dirichlet";
  std::string g = "one";
  double lambda = 0.1;
  std::string lambdas;  // comma-separated list (sweep)
  double tmax = 40.0;
  int nodes = 4001;
  double tol = 1e-12;
  std::string method = "both";
  std::string out = ".";
};

void attach_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--N", o.N, "space dimension (2 or 3)")->capture_default_str();
  cmd->add_option("--bc", o.bc, "boundary family: dirichlet | navier")->capture_default_str();
  cmd->add_option("--g", o.g,
                  "datum: one | zero | power:a | indicator:a,b | csv:PATH")
      ->capture_default_str();
  cmd->add_option("--tmax", o.tmax, "half-line truncation horizon")->capture_default_str();
  cmd->add_option("--nodes", o.nodes, "grid nodes (odd, >= 3)")->capture_default_str();
  cmd->add_option("--tol", o.tol, "iteration step tolerance")->capture_default_str();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
}

/// Semantic validation with the contracted messages; returns false after
/// printing to stderr (usage error).
bool validate(const Options& o, bool with_method) {
  const auto fail = [](const char* msg) {
    std::fprintf(stderr, "%s\n", msg);
    return false;
  };
  if (o.N != 2 && o.N != 3) return fail("N must be 2 or 3");
  if (o.bc != "dirichlet" && o.bc != "navier")
    return fail("bc must be dirichlet or navier");
  if (with_method && o.method != "picard" && o.method != "monotone" &&
      o.method != "both")
    return fail("method must be picard, monotone, or both");
  if (!(o.tmax > 0.0)) return fail("tmax must be positive");
  if (o.nodes < 3 || o.nodes % 2 == 0)
    return fail("nodes must be an odd integer >= 3");
  if (!(o.tol > 0.0)) return fail("tol must be positive");
  return true;
}

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(pos, comma - pos);
    // trim spaces
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    if (!item.empty()) {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size())
        throw std::invalid_argument("bad lambda value '" + item + "'");
      out.push_back(v);
    }
    pos = comma + 1;
  }
  return out;
}

std::string case_suffix(const Options& o, double lambda) {
  return "N" + std::to_string(o.N) + "_" + o.bc + "_lambda" +
         detail::format_double(lambda);
}

// ---------------------------------------------------------------------------
// solve

struct SolveOutcome {
  std::optional<Solution> picard;
  std::optional<MonotoneRun> monotone;
  std::string monotone_error;
  std::optional<double> agreement;
  bool converged = false;
};

SolveOutcome run_methods(const Options& o, const ForcingProfile& p, BcFamily bc,
                         double lambda) {
  SolveOutcome r;
  const bool want_picard = o.method == "picard" || o.method == "both";
  const bool want_monotone = o.method == "monotone" || o.method == "both";
  if (want_picard) {
    PicardConfig cfg;
    cfg.tol = o.tol;
    cfg.lambda = lambda;
    r.picard = solve_picard(cfg, p, bc, o.N);
  }
  if (want_monotone) {
    try {
      r.monotone = monotone_iterate(lambda, p, bc, o.tol);
    } catch (const std::invalid_argument& e) {
      r.monotone_error = e.what();
    }
  }
  bool ok = true;
  if (want_picard) ok = ok && r.picard->converged;
  if (want_monotone) ok = ok && r.monotone && r.monotone->final.converged;
  r.converged = ok;
  if (o.method == "both" && r.picard && r.monotone)
    r.agreement = sup_diff(r.picard->w.values, r.monotone->final.w.values);
  return r;
}

/// The solution whose curves get exported: Picard when converged, else the
/// monotone limit, else the last Picard attempt.
const Solution* exported_solution(const SolveOutcome& r) {
  if (r.picard && r.picard->converged) return &*r.picard;
  if (r.monotone && r.monotone->final.converged) return &r.monotone->final;
  if (r.picard) return &*r.picard;
  if (r.monotone) return &r.monotone->final;
  return nullptr;
}

std::string solution_csv(const Solution& s) {
  std::string out = "t,w,w_prime\n";
  const Grid& g = *s.w.grid;
  for (int k = 0; k < g.n; ++k) {
    out += fmt17(g.nodes[static_cast<std::size_t>(k)]);
    out += ',';
    out += fmt17(s.w.values[static_cast<std::size_t>(k)]);
    out += ',';
    out += fmt17(s.w.deriv[static_cast<std::size_t>(k)]);
    out += '\n';
  }
  return out;
}

std::string method_json(const Solution& s) {
  std::string out = "{";
  out += "\"converged\":" + json_bool(s.converged);
  out += ",\"iterations\":" + std::to_string(s.iterations);
  out += ",\"residual_sup\":" + json_num(s.residual_sup);
  out += ",\"mu_norm\":" + json_num(s.mu_norm);
  out += ",\"contraction_ratios\":" + json_ratio_array(s.contraction_ratios);
  out += ",\"note\":" + json_str(s.note);
  out += "}";
  return out;
}

std::string diagnostics_json(const Options& o, double lambda,
                             const SolveOutcome& r) {
  std::string out = "{";
  out += "\"N\":" + std::to_string(o.N);
  out += ",\"bc\":" + json_str(o.bc);
  out += ",\"g\":" + json_str(o.g);
  out += ",\"lambda\":" + json_num(lambda);
  out += ",\"t_max\":" + json_num(o.tmax);
  out += ",\"nodes\":" + std::to_string(o.nodes);
  out += ",\"tol\":" + json_num(o.tol);
  out += ",\"method\":" + json_str(o.method);
  if (r.picard) out += ",\"picard\":" + method_json(*r.picard);
  if (r.monotone) {
    std::string m = method_json(r.monotone->final);
    m.pop_back();  // reopen the object for the bracketing extras
    m += ",\"beta\":" + json_num(r.monotone->beta);
    m += ",\"ordering_violation\":" + json_num(r.monotone->ordering_violation);
    m += ",\"bracket_violation\":" + json_num(r.monotone->bracket_violation);
    m += "}";
    out += ",\"monotone\":" + m;
  } else if (!r.monotone_error.empty()) {
    out += ",\"monotone\":{\"error\":" + json_str(r.monotone_error) + "}";
  }
  if (o.method == "both")
    out += ",\"agreement\":" + (r.agreement ? json_num(*r.agreement) : "null");
  out += ",\"converged\":" + json_bool(r.converged);
  out += "}\n";
  return out;
}

int cmd_solve(const Options& o) {
  const GridPtr grid = make_grid(o.tmax, o.nodes);
  const Datum d = load_datum(o.g);
  const ForcingProfile p = h1_eval(d, o.N, grid);
  const BcFamily bc = parse_bc(o.bc);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  const SolveOutcome r = run_methods(o, p, bc, o.lambda);
  const std::string suffix = case_suffix(o, o.lambda);

  if (const Solution* s = exported_solution(r)) {
    write_file(dir / ("solution_" + suffix + ".csv"), solution_csv(*s));
    if (s->converged) {
      const RadialProfile prof = w_to_profile(*s);
      write_file(dir / profile_filename(o.N, bc, o.lambda),
                 export_profile(prof, ProfileFormat::csv));
    }
  }
  write_file(dir / ("diagnostics_" + suffix + ".json"),
             diagnostics_json(o, o.lambda, r));

  if (r.picard)
    std::printf("picard: %s after %d iterations, residual %.3g\n",
                r.picard->converged ? "converged" : "did not converge",
                r.picard->iterations, r.picard->residual_sup);
  if (r.monotone)
    std::printf("monotone: %s after %d iterations, residual %.3g\n",
                r.monotone->final.converged ? "converged" : "did not converge",
                r.monotone->final.iterations, r.monotone->final.residual_sup);
  else if (!r.monotone_error.empty())
    std::printf("monotone: inapplicable (%s)\n", r.monotone_error.c_str());
  if (r.agreement) std::printf("method agreement: %.3g sup\n", *r.agreement);
  return r.converged ? 0 : 2;
}

// ---------------------------------------------------------------------------
// bounds

int cmd_bounds(const Options& o) {
  const GridPtr grid = make_grid(o.tmax, o.nodes);
  const Datum d = load_datum(o.g);
  const ForcingProfile p = h1_eval(d, o.N, grid);
  const BcFamily bc = parse_bc(o.bc);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  std::optional<BoundsReport> full;
  std::string failure;
  try {
    full = nonexistence_threshold(p, o.N, bc);
  } catch (const std::invalid_argument& e) {
    failure = e.what();
  }
  const double cond2 = full ? full->lambda_cond2 : cond2_threshold(p, o.N);

  std::string out = "{";
  out += "\"N\":" + std::to_string(o.N);
  out += ",\"bc\":" + json_str(o.bc);
  out += ",\"g\":" + json_str(o.g);
  out += ",\"t_max\":" + json_num(o.tmax);
  out += ",\"nodes\":" + std::to_string(o.nodes);
  out += ",\"lambda_cond2\":" + json_num(cond2);
  if (full) {
    out += ",\"c_prime\":" + json_num(full->c_prime);
    out += ",\"c_const\":" + json_num(full->c_const);
    out += ",\"lambda_nonexist\":" + json_num(full->lambda_nonexist);
    out += ",\"classification\":{";
    out += "\"existence_sufficient\":[\"-inf\"," + json_num(cond2) + "]";
    out += ",\"unknown\":[" + json_num(cond2) + "," +
           json_num(full->lambda_nonexist) + "]";
    out += ",\"nonexistence\":[" + json_num(full->lambda_nonexist) +
           ",\"+inf\"]";
    out += "}";
    out += ",\"note\":" + json_str(full->classification_note);
  } else {
    out += ",\"c_prime\":null,\"c_const\":null,\"lambda_nonexist\":null";
    out += ",\"classification\":{\"existence_sufficient\":[\"-inf\"," +
           json_num(cond2) + "]}";
    out += ",\"note\":" +
           json_str("non-existence analysis inapplicable: " + failure);
  }
  out += "}\n";

  const std::string name = "bounds_N" + std::to_string(o.N) + "_" + o.bc + "_" +
                           slug(d.label) + ".json";
  write_file(dir / name, out);

  std::printf("lambda_cond2    = %s\n", fmt17(cond2).c_str());
  if (full) {
    std::printf("c_prime         = %s\n", fmt17(full->c_prime).c_str());
    std::printf("c_const         = %s\n", fmt17(full->c_const).c_str());
    std::printf("lambda_nonexist = %s\n", fmt17(full->lambda_nonexist).c_str());
    std::printf("%s\n", full->classification_note.c_str());
  } else {
    std::printf("non-existence analysis inapplicable: %s\n", failure.c_str());
    std::printf("existence certified for lambda <= %s\n", fmt17(cond2).c_str());
  }
  std::printf("wrote %s\n", (dir / name).string().c_str());
  return full ? 0 : 2;
}

// ---------------------------------------------------------------------------
// sweep

unsigned sweep_thread_cap(std::size_t rows) {
  unsigned t = std::thread::hardware_concurrency();
  if (t == 0) t = 1;
  if (const char* env = std::getenv("KHESSIAN_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 1024) t = static_cast<unsigned>(v);
  }
  if (rows > 0 && t > rows) t = static_cast<unsigned>(rows);
  return t == 0 ? 1 : t;
}

std::string csv_safe(std::string text) {
  for (char& c : text)
    if (c == ',' || c == '\n') c = ';';
  return text;
}

std::string sweep_row(const Options& o, const ForcingProfile& p, BcFamily bc,
                      const std::optional<BoundsReport>& rep, double cond2,
                      double lambda) {
  std::string row = fmt17(lambda);
  try {
    std::string cls;
    if (rep)
      cls = to_string(classify_lambda(lambda, *rep));
    else
      cls = lambda <= cond2 ? to_string(LambdaClass::existence_sufficient)
                            : to_string(LambdaClass::unknown);
    const SolveOutcome r = run_methods(o, p, bc, lambda);
    const bool want_picard = o.method == "picard" || o.method == "both";
    const bool want_monotone = o.method == "monotone" || o.method == "both";

    row += ',' + cls;
    row += ',';
    row += !want_picard ? "skipped" : (r.picard->converged ? "true" : "false");
    row += ',';
    if (!want_monotone)
      row += "skipped";
    else if (!r.monotone)
      row += "inapplicable";
    else
      row += r.monotone->final.converged ? "true" : "false";

    const Solution* s = exported_solution(r);
    row += ',';
    row += s ? fmt17(s->residual_sup) : "nan";

    const std::optional<double> init = find_decaying(lambda, p, o.N, bc);
    row += ',';
    row += init ? fmt17(*init) : "none";
  } catch (const std::exception& e) {
    row += ",error: " + csv_safe(e.what()) + ",false,false,nan,none";
  }
  row += '\n';
  return row;
}

int cmd_sweep(const Options& o) {
  const GridPtr grid = make_grid(o.tmax, o.nodes);
  const Datum d = load_datum(o.g);
  const ForcingProfile p = h1_eval(d, o.N, grid);
  const BcFamily bc = parse_bc(o.bc);
  const std::vector<double> lams = parse_lambda_list(o.lambdas);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);

  std::optional<BoundsReport> rep;
  try {
    rep = nonexistence_threshold(p, o.N, bc);
  } catch (const std::invalid_argument&) {
  }
  const double cond2 = rep ? rep->lambda_cond2 : cond2_threshold(p, o.N);

  std::vector<std::string> rows(lams.size());
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= lams.size()) break;
      rows[i] = sweep_row(o, p, bc, rep, cond2, lams[i]);
    }
  };
  const unsigned threads = sweep_thread_cap(lams.size());
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::string out =
      "lambda,classification,picard_converged,monotone_converged,residual,"
      "oracle_init\n";
  for (const std::string& row : rows) out += row;

  const std::string name = "sweep_N" + std::to_string(o.N) + "_" + o.bc + "_" +
                           slug(d.label) + ".csv";
  write_file(dir / name, out);
  std::printf("wrote %s (%zu rows)\n", (dir / name).string().c_str(),
              lams.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial fourth-order solver suite on the unit ball"};
  app.require_subcommand(1);

  Options solve_opts, bounds_opts, sweep_opts;

  CLI::App* solve = app.add_subcommand("solve", "solve one case and export curves");
  attach_common(solve, solve_opts);
  solve->add_option("--lambda", solve_opts.lambda, "forcing multiplier")
      ->capture_default_str();
  solve->add_option("--method", solve_opts.method, "picard | monotone | both")
      ->capture_default_str();

  CLI::App* bounds = app.add_subcommand("bounds", "report solvability thresholds");
  attach_common(bounds, bounds_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "classify a list of lambdas");
  attach_common(sweep, sweep_opts);
  sweep->add_option("--lambdas", sweep_opts.lambdas,
                    "comma-separated lambda list");
  sweep->add_option("--method", sweep_opts.method, "picard | monotone | both")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (solve->parsed()) {
      if (!validate(solve_opts, true)) return 1;
      return cmd_solve(solve_opts);
    }
    if (bounds->parsed()) {
      if (!validate(bounds_opts, false)) return 1;
      return cmd_bounds(bounds_opts);
    }
    if (!validate(sweep_opts, true)) return 1;
    return cmd_sweep(sweep_opts);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
