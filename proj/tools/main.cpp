// Command-line surface: closed-form law evaluation, diffusion simulation,
// statistical verification of sample files, gasket estimates, and the
// martingale constancy check.  Every output carries a JSON run manifest;
// identical parameters reproduce identical data payloads.
//
// Exit codes: 0 all gates pass, 2 statistical gate failure, 3 domain or
// usage error.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cleradii/diffusion.hpp"
#include "cleradii/errors.hpp"
#include "cleradii/gasket.hpp"
#include "cleradii/law.hpp"
#include "cleradii/martingale.hpp"
#include "cleradii/sample_io.hpp"
#include "cleradii/stats.hpp"
#include "cleradii/version.hpp"

namespace {

using cleradii::Kappa;
using cleradii::io::RunManifest;
using cleradii::io::Table;
using cleradii::io::format_double;
using json = nlohmann::json;
namespace diff = cleradii::diffusion;
namespace law = cleradii::law;
namespace stats = cleradii::stats;

using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitGateFailure = 2;
constexpr int kExitUsage = 3;

struct Grid {
  double start = 0.0, stop = 0.0;
  std::size_t steps = 1;

  std::vector<double> points() const {
    std::vector<double> xs;
    xs.reserve(steps);
    if (steps == 1) {
      xs.push_back(start);
      return xs;
    }
    for (std::size_t i = 0; i < steps; ++i) {
      xs.push_back(start + (stop - start) * double(i) / double(steps - 1));
    }
    return xs;
  }
};

Grid parse_grid(const std::string& spec) {
  Grid g;
  char c1 = 0, c2 = 0;
  std::istringstream ss(spec);
  ss >> g.start >> c1 >> g.stop >> c2 >> g.steps;
  if (ss.fail() || c1 != ':' || c2 != ':' || g.steps < 1) {
    throw cleradii::domain_error("bad --grid, expected start:stop:steps: " +
                                 spec);
  }
  return g;
}

struct OutputTarget {
  std::string path;  // empty = stdout
  std::string format = "csv";

  template <class WriterCsv, class WriterJson>
  void write(WriterCsv&& csv, WriterJson&& js) const {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!path.empty()) {
      file.open(path);
      cleradii::require(file.good(), "cannot open output file: " + path);
      os = &file;
    }
    if (format == "json") {
      js(*os);
    } else {
      csv(*os);
    }
  }
};

double elapsed_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// law
// ---------------------------------------------------------------------------

struct LawArgs {
  double kappa = 6.0;
  std::string what;
  std::string grid;
  double lambda = 0.0;
  bool lambda_set = false;
  OutputTarget out;
};

int run_law(const LawArgs& a) {
  const auto t0 = Clock::now();
  const Kappa kappa(a.kappa);
  Table table;
  table.columns = {"argument", "value", "error_bound"};

  auto grid_or = [&](const std::string& fallback) {
    return parse_grid(a.grid.empty() ? fallback : a.grid).points();
  };

  if (a.what == "mean") {
    table.add_row({a.kappa, law::mean(kappa), 0.0});
  } else if (a.what == "alpha") {
    table.add_row({a.kappa, law::gasket_exponents(kappa).alpha, 0.0});
  } else if (a.what == "dimension") {
    table.add_row(
        {a.kappa, law::gasket_exponents(kappa).expectation_dimension, 0.0});
  } else if (a.what == "abscissa") {
    table.add_row({a.kappa, law::mgf_abscissa(kappa), 0.0});
  } else if (a.what == "density") {
    for (double x : grid_or("0.5:30:60")) {
      const auto v = law::density(kappa, x);
      table.add_row({x, v.value, v.error_bound});
    }
  } else if (a.what == "cdf") {
    for (double x : grid_or("0.5:30:60")) {
      table.add_row({x, law::cdf(kappa, x), 1e-9});
    }
  } else if (a.what == "mgf" || a.what == "thickness-mgf") {
    std::vector<double> lams =
        a.lambda_set ? std::vector<double>{a.lambda} : grid_or("-2:0:21");
    for (double lam : lams) {
      const std::complex<double> v =
          a.what == "mgf" ? law::mgf(kappa, {lam, 0.0})
                          : law::thickness_mgf(kappa, {lam, 0.0});
      table.add_row({lam, v.real(), 1e-13 * std::abs(v)});
    }
  } else {
    throw cleradii::domain_error("unknown --what: " + a.what);
  }

  RunManifest manifest;
  manifest.command = "law";
  manifest.params = {{"kappa", format_double(a.kappa)},
                     {"what", a.what},
                     {"grid", a.grid},
                     {"lambda", a.lambda_set ? format_double(a.lambda) : ""},
                     {"format", a.out.format}};
  manifest.wall_seconds = elapsed_since(t0);
  a.out.write(
      [&](std::ostream& os) { cleradii::io::write_table_csv(os, manifest, table); },
      [&](std::ostream& os) { cleradii::io::write_table_json(os, manifest, table); });
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  double kappa = 6.0;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  double theta0 = 0.0;
  double dt_max = 1e-3;
  double dt_floor = 1e-9;
  double max_time = 0.0;
  OutputTarget out;
};

RunManifest simulate_manifest(const SimulateArgs& a) {
  RunManifest m;
  m.command = "simulate";
  m.seed = a.seed;
  m.params = {{"kappa", format_double(a.kappa)},
              {"n", std::to_string(a.n)},
              {"theta0", format_double(a.theta0)},
              {"dt_max", format_double(a.dt_max)},
              {"dt_floor", format_double(a.dt_floor)},
              {"max_time", format_double(a.max_time)},
              {"step_policy_c", format_double(diff::kStepPolicyC)},
              {"kernel_radius", format_double(diff::kBallRadius)},
              {"format", a.out.format}};
  return m;
}

int run_simulate(const SimulateArgs& a) {
  const auto t0 = Clock::now();
  cleradii::require(a.n >= 1, "simulate: --n must be at least 1");
  const diff::SimConfig cfg(Kappa(a.kappa), a.theta0, a.dt_max, a.dt_floor,
                            a.seed, a.max_time);
  const auto batch = diff::sample_exit_batch(cfg, a.n);
  RunManifest manifest = simulate_manifest(a);
  manifest.params["censored"] = std::to_string(batch.censored);
  manifest.wall_seconds = elapsed_since(t0);
  a.out.write(
      [&](std::ostream& os) {
        cleradii::io::write_samples_csv(os, manifest, batch.samples);
      },
      [&](std::ostream& os) {
        cleradii::io::write_samples_json(os, manifest, batch.samples);
      });
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string input;
  double kappa = 0.0;
  bool kappa_set = false;
  OutputTarget out;
};

// Empirical tail log-slope over levels between the 85% and 99.95% sample
// quantiles.  The window is part of the report so its influence stays
// visible.
struct TailFit {
  stats::SlopeFit fit;
  double window_lo = 0.0, window_hi = 0.0;
};

TailFit tail_slope(const stats::EmpiricalLaw& emp) {
  TailFit out;
  out.window_lo = emp.samples[std::size_t(0.85 * double(emp.n - 1))];
  out.window_hi = emp.samples[std::size_t(0.9995 * double(emp.n - 1))];
  std::vector<std::pair<double, double>> pts;
  const int levels = 12;
  for (int j = 0; j < levels; ++j) {
    const double s = out.window_lo + (out.window_hi - out.window_lo) *
                                         double(j) / double(levels - 1);
    const auto it =
        std::upper_bound(emp.samples.begin(), emp.samples.end(), s);
    const std::size_t survivors = std::size_t(emp.samples.end() - it);
    if (survivors < 20) break;
    pts.emplace_back(s, std::log(double(survivors) / double(emp.n)));
  }
  out.fit = stats::slope_fit(pts);
  return out;
}

int run_verify(const VerifyArgs& a) {
  const auto t0 = Clock::now();
  const auto file = cleradii::io::read_samples(a.input);
  cleradii::require(!file.samples.empty(),
                    "verify: sample file has no rows: " + a.input);
  // manifest consistency: declared sample count must match the rows present
  {
    const auto n_it = file.manifest.params.find("n");
    const auto c_it = file.manifest.params.find("censored");
    cleradii::require(n_it != file.manifest.params.end(),
                      "verify: manifest mismatch: missing n");
    const std::size_t declared = std::stoull(n_it->second);
    const std::size_t censored =
        c_it == file.manifest.params.end() ? 0 : std::stoull(c_it->second);
    cleradii::require(
        declared == file.samples.size() + censored,
        "verify: manifest mismatch: n=" + n_it->second + " but " +
            std::to_string(file.samples.size()) + " rows and " +
            std::to_string(censored) + " censored");
  }
  // an explicit --kappa selects the null law (possibly different from the
  // one that generated the file; the gates then fail statistically)
  const double file_kappa = file.manifest.param_as_double("kappa");
  const Kappa kappa(a.kappa_set ? a.kappa : file_kappa);

  std::vector<double> xs;
  xs.reserve(file.samples.size());
  for (const auto& s : file.samples) xs.push_back(s.exit_time);
  const auto emp = stats::EmpiricalLaw::from_samples(
      std::move(xs), stats::fnv1a(file.manifest.to_json().dump()));

  const double ks = stats::ks_statistic(
      emp, [&](double x) { return x <= 0.0 ? 0.0 : law::cdf(kappa, x); });
  const double ks_gate = stats::ks_threshold(emp.n);
  const bool ks_pass = ks < ks_gate;

  const double mean = emp.mean();
  const double se = emp.std_error();
  const double mean_target = law::mean(kappa);
  const bool mean_pass = std::abs(mean - mean_target) <= 3.0 * se;

  const double alpha = law::gasket_exponents(kappa).alpha;
  const auto tail = tail_slope(emp);
  const auto& fit = tail.fit;
  const bool tail_pass = std::abs(fit.slope + alpha) <= 0.10 * alpha;

  const bool pass = ks_pass && mean_pass && tail_pass;

  json report;
  report["command"] = "verify";
  report["input"] = a.input;
  report["kappa"] = kappa.value();
  report["n"] = emp.n;
  report["rng_version"] = file.manifest.rng_version;
  report["ks"] = {{"statistic", ks}, {"threshold", ks_gate}, {"pass", ks_pass}};
  report["mean"] = {{"sample", mean},
                    {"closed_form", mean_target},
                    {"std_error", se},
                    {"pass", mean_pass}};
  report["tail"] = {{"slope", fit.slope},
                    {"target", -alpha},
                    {"std_error", fit.std_error},
                    {"points", fit.points},
                    {"window", {tail.window_lo, tail.window_hi}},
                    {"pass", tail_pass}};
  report["pass"] = pass;
  report["wall_seconds"] = elapsed_since(t0);

  a.out.write([&](std::ostream& os) { os << report.dump(2) << "\n"; },
              [&](std::ostream& os) { os << report.dump(2) << "\n"; });
  return pass ? kExitOk : kExitGateFailure;
}

// ---------------------------------------------------------------------------
// gasket
// ---------------------------------------------------------------------------

struct GasketArgs {
  double kappa = 6.0;
  std::string mode;
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  std::size_t depth = 50;
  double epsilon = 1.0 / 64.0;
  double dt_max = 1e-3;
  std::string grid;
  OutputTarget out;
};

int run_gasket(const GasketArgs& a) {
  const auto t0 = Clock::now();
  const Kappa kappa(a.kappa);
  Table table;
  json extra;

  if (a.mode == "survival") {
    const auto levels =
        parse_grid(a.grid.empty() ? "10:60:6" : a.grid).points();
    const auto curve =
        cleradii::gasket::survival_curve(kappa, levels, a.n, a.seed, a.dt_max);
    table.columns = {"s",       "estimate",  "std_error",
                     "closed_form_tail", "survivors", "degenerate"};
    std::vector<std::pair<double, double>> pts;
    bool any_degenerate = false;
    for (const auto& e : curve) {
      table.add_row({e.s, e.estimate, e.std_error, e.closed_form_tail,
                     double(e.survivors), e.degenerate ? 1.0 : 0.0});
      any_degenerate |= e.degenerate;
      if (!e.degenerate && e.estimate > 0.0) {
        pts.emplace_back(e.s, std::log(e.estimate));
      }
    }
    const double alpha = law::gasket_exponents(kappa).alpha;
    extra["target_slope"] = -alpha;
    extra["insufficient_survivals"] = any_degenerate;
    if (pts.size() >= 3) {
      const auto fit = stats::slope_fit(pts);
      extra["fit"] = {{"slope", fit.slope}, {"std_error", fit.std_error},
                      {"points", fit.points}};
    }
  } else if (a.mode == "covering") {
    const auto est = cleradii::gasket::covering_sum(kappa, a.epsilon);
    table.columns = {"epsilon", "expected_disk_count"};
    for (int i = 0; i <= 8; ++i) {
      const double eps = a.epsilon * std::pow(2.0, -double(i));
      table.add_row({eps,
                     cleradii::gasket::detail::annulus_sum(
                         law::gasket_exponents(kappa).alpha, eps)});
    }
    extra["exponent_fit"] = est.exponent_fit;
    extra["target_exponent"] = law::gasket_exponents(kappa).alpha - 2.0;
  } else if (a.mode == "nested") {
    const auto sequences =
        cleradii::gasket::sample_nested_batch(kappa, a.depth, a.n, a.seed);
    table.columns = {"sequence", "level", "increment", "log_cr"};
    for (std::size_t i = 0; i < sequences.size(); ++i) {
      const auto& seq = sequences[i];
      for (std::size_t k = 0; k < seq.increments.size(); ++k) {
        table.add_row({double(i), double(k + 1), seq.increments[k],
                       seq.log_cr[k + 1]});
      }
    }
  } else {
    throw cleradii::domain_error("unknown --mode: " + a.mode);
  }

  RunManifest manifest;
  manifest.command = "gasket";
  manifest.seed = a.seed;
  manifest.params = {{"kappa", format_double(a.kappa)},
                     {"mode", a.mode},
                     {"n", std::to_string(a.n)},
                     {"depth", std::to_string(a.depth)},
                     {"epsilon", format_double(a.epsilon)},
                     {"dt_max", format_double(a.dt_max)},
                     {"grid", a.grid},
                     {"format", a.out.format}};
  table.extra = extra;
  manifest.wall_seconds = elapsed_since(t0);
  a.out.write(
      [&](std::ostream& os) { cleradii::io::write_table_csv(os, manifest, table); },
      [&](std::ostream& os) { cleradii::io::write_table_json(os, manifest, table); });
  return kExitOk;
}

// ---------------------------------------------------------------------------
// martingale
// ---------------------------------------------------------------------------

struct MartingaleArgs {
  double kappa = 6.0;
  double lambda = -0.1;
  double theta0 = 0.0;
  std::string checkpoints = "1,5,20";
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  OutputTarget out;
};

int run_martingale(const MartingaleArgs& a) {
  const auto t0 = Clock::now();
  const Kappa kappa(a.kappa);
  cleradii::require(a.lambda <= 0.0, "martingale: --lambda must be <= 0");
  std::vector<double> cps;
  {
    std::istringstream ss(a.checkpoints);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) cps.push_back(std::stod(tok));
    }
    cleradii::require(!cps.empty(), "martingale: no checkpoints given");
  }
  const diff::SimConfig cfg(kappa, a.theta0, 1e-3, 1e-9, a.seed);
  const auto est = diff::path_functional_martingale(cfg, {a.lambda, 0.0}, cps,
                                                    a.n);
  const double reference =
      cleradii::martingale::m_even(kappa, {a.lambda, 0.0}, a.theta0).real();

  Table table;
  table.columns = {"t", "mean", "std_error", "z_score"};
  bool pass = true;
  for (const auto& e : est) {
    const double z =
        e.se_real > 0.0 ? (e.mean.real() - reference) / e.se_real : 0.0;
    pass = pass && std::abs(e.mean.real() - reference) <= 3.0 * e.se_real;
    table.add_row({e.t, e.mean.real(), e.se_real, z});
  }
  table.extra = {{"reference", reference}, {"pass", pass}};

  RunManifest manifest;
  manifest.command = "martingale";
  manifest.seed = a.seed;
  manifest.params = {{"kappa", format_double(a.kappa)},
                     {"lambda", format_double(a.lambda)},
                     {"theta0", format_double(a.theta0)},
                     {"checkpoints", a.checkpoints},
                     {"n", std::to_string(a.n)},
                     {"format", a.out.format}};
  manifest.wall_seconds = elapsed_since(t0);
  a.out.write(
      [&](std::ostream& os) { cleradii::io::write_table_csv(os, manifest, table); },
      [&](std::ostream& os) { cleradii::io::write_table_json(os, manifest, table); });
  return pass ? kExitOk : kExitGateFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal-radius laws and diffusion Monte Carlo"};
  app.set_version_flag("--version", std::string(cleradii::kVersion));
  app.require_subcommand(1);

  LawArgs law_args;
  auto* law_cmd = app.add_subcommand("law", "evaluate closed-form laws");
  law_cmd->add_option("--kappa", law_args.kappa)->required();
  law_cmd->add_option("--what", law_args.what)->required();
  law_cmd->add_option("--grid", law_args.grid);
  law_cmd->add_option("--lambda", law_args.lambda)
      ->each([&](const std::string&) { law_args.lambda_set = true; });
  law_cmd->add_option("--output", law_args.out.path);
  law_cmd->add_option("--format", law_args.out.format)
      ->check(CLI::IsMember({"csv", "json"}));

  SimulateArgs sim_args;
  auto* sim_cmd =
      app.add_subcommand("simulate", "sample diffusion hitting times");
  sim_cmd->add_option("--kappa", sim_args.kappa)->required();
  sim_cmd->add_option("--n", sim_args.n)->required();
  sim_cmd->add_option("--seed", sim_args.seed);
  sim_cmd->add_option("--theta0", sim_args.theta0);
  sim_cmd->add_option("--dt-max", sim_args.dt_max);
  sim_cmd->add_option("--dt-floor", sim_args.dt_floor);
  sim_cmd->add_option("--max-time", sim_args.max_time);
  sim_cmd->add_option("--output", sim_args.out.path);
  sim_cmd->add_option("--format", sim_args.out.format)
      ->check(CLI::IsMember({"csv", "json"}));

  VerifyArgs ver_args;
  auto* ver_cmd =
      app.add_subcommand("verify", "check a sample file against the law");
  ver_cmd->add_option("--input", ver_args.input)->required();
  ver_cmd->add_option("--kappa", ver_args.kappa)
      ->each([&](const std::string&) { ver_args.kappa_set = true; });
  ver_cmd->add_option("--output", ver_args.out.path);
  ver_cmd->add_option("--format", ver_args.out.format)
      ->check(CLI::IsMember({"csv", "json"}));

  GasketArgs gas_args;
  auto* gas_cmd = app.add_subcommand("gasket", "gasket exponent estimates");
  gas_cmd->add_option("--kappa", gas_args.kappa)->required();
  gas_cmd->add_option("--mode", gas_args.mode)
      ->required()
      ->check(CLI::IsMember({"survival", "covering", "nested"}));
  gas_cmd->add_option("--n", gas_args.n);
  gas_cmd->add_option("--seed", gas_args.seed);
  gas_cmd->add_option("--depth", gas_args.depth);
  gas_cmd->add_option("--epsilon", gas_args.epsilon);
  gas_cmd->add_option("--dt-max", gas_args.dt_max);
  gas_cmd->add_option("--grid", gas_args.grid);
  gas_cmd->add_option("--output", gas_args.out.path);
  gas_cmd->add_option("--format", gas_args.out.format)
      ->check(CLI::IsMember({"csv", "json"}));

  MartingaleArgs mar_args;
  auto* mar_cmd =
      app.add_subcommand("martingale", "martingale constancy check");
  mar_cmd->add_option("--kappa", mar_args.kappa)->required();
  mar_cmd->add_option("--lambda", mar_args.lambda);
  mar_cmd->add_option("--theta0", mar_args.theta0);
  mar_cmd->add_option("--checkpoints", mar_args.checkpoints);
  mar_cmd->add_option("--n", mar_args.n);
  mar_cmd->add_option("--seed", mar_args.seed);
  mar_cmd->add_option("--output", mar_args.out.path);
  mar_cmd->add_option("--format", mar_args.out.format)
      ->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_name() == "CallForHelp" || e.get_name() == "CallForVersion"
               ? kExitOk
               : kExitUsage;
  }

  try {
    if (*law_cmd) return run_law(law_args);
    if (*sim_cmd) return run_simulate(sim_args);
    if (*ver_cmd) return run_verify(ver_args);
    if (*gas_cmd) return run_gasket(gas_args);
    if (*mar_cmd) return run_martingale(mar_args);
  } catch (const cleradii::censoring_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGateFailure;
  } catch (const cleradii::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
