#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cglmp/bell.hpp"
#include "cglmp/fringe.hpp"
#include "cglmp/io.hpp"
#include "cglmp/photon.hpp"
#include "cglmp/state.hpp"

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 12345;

std::uint64_t default_seed() {
  const char* env = std::getenv("CGLMP_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  char* end = nullptr;
  unsigned long long value = std::strtoull(env, &end, 10);
  if (end == nullptr || *end != '\0')
    throw std::invalid_argument("CGLMP_SEED must be a non-negative integer");
  return static_cast<std::uint64_t>(value);
}

void emit_json(const json& j, const std::string& out_path) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    cglmp::atomic_write(out_path, text);
}

struct Options {
  int precision = 6;
  // theory smax / optimize
  int d = 4;
  std::string state_name = "mes";
  // analyze
  std::string counts_path;
  int bootstrap = 10000;
  std::uint64_t seed = kDefaultSeed;
  // simulate
  std::string config_path;
  // fit / scan
  std::string data_path;
  std::string model_name;
  double gamma = 0.7393724305634157;
  bool weighted = false;
  bool fit_gamma = false;
  double m1 = 1.0;
  double m2 = 0.0;
  int points_a = 41;
  std::vector<double> theta_b{0.0};
  std::string out_path;
};

cglmp::FringeModel make_model(const Options& opt) {
  if (opt.model_name == "mes") return cglmp::FringeModel::mes();
  if (opt.model_name == "oes") return cglmp::FringeModel::oes(opt.gamma);
  throw std::invalid_argument("model must be 'mes' or 'oes'");
}

void run_theory_smax(const Options& opt) {
  double s = 0.0;
  if (opt.state_name == "mes")
    s = cglmp::s_value(cglmp::quantum_table(cglmp::maximally_entangled(opt.d))).value;
  else if (opt.state_name == "oes")
    s = cglmp::optimize_state(opt.d).s_max;
  else
    throw std::invalid_argument("state must be 'mes' or 'oes'");
  json j;
  j["d"] = opt.d;
  j["state"] = opt.state_name;
  j["s_value"] = cglmp::round_sig(s, opt.precision);
  emit_json(j, opt.out_path);
}

void run_theory_optimize(const Options& opt) {
  cglmp::OptimizationResult result = cglmp::optimize_state(opt.d);
  int d = result.state.dim();
  json j;
  j["d"] = d;
  j["s_max"] = cglmp::round_sig(result.s_max, opt.precision);
  double off_max = 0.0;
  json diag = json::array();
  for (int k = 0; k < d; ++k)
    diag.push_back(cglmp::round_sig(std::abs(result.state.amplitude(k, k)),
                                    opt.precision));
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      if (i != k) off_max = std::max(off_max, std::abs(result.state.amplitude(i, k)));
  j["schmidt_coefficients"] = diag;
  j["off_diagonal_max"] = off_max;
  if (d == 4) {
    double edge = std::abs(result.state.amplitude(0, 0));
    double inner = std::abs(result.state.amplitude(1, 1));
    j["gamma"] = cglmp::round_sig(inner / edge, opt.precision);
  }
  json amps = json::array();
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      cglmp::Complex c = result.state.amplitude(i, k);
      amps.push_back({cglmp::round_sig(c.real(), opt.precision),
                      cglmp::round_sig(c.imag(), opt.precision)});
    }
  j["amplitudes"] = amps;
  emit_json(j, opt.out_path);
}

void run_analyze(const Options& opt) {
  cglmp::CountTable counts = cglmp::read_count_csv(std::filesystem::path(opt.counts_path));
  cglmp::AnalysisReport report = cglmp::analyze_counts(counts, opt.bootstrap, opt.seed);
  emit_json(cglmp::report_to_json(report, opt.precision), opt.out_path);
}

void run_simulate(const Options& opt) {
  cglmp::SimulationConfig config =
      cglmp::load_simulation_config(std::filesystem::path(opt.config_path));
  cglmp::CountTable table = cglmp::simulate_experiment(
      config.state, config.noise, config.schedule, config.gates_per_setting,
      config.sampling, config.threads);
  cglmp::write_count_csv(table, std::filesystem::path(opt.out_path));
  std::int64_t total = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int la = 0; la < table.dim(); ++la)
        for (int lb = 0; lb < table.dim(); ++lb) total += table.at(a, b, la, lb);
  json j;
  j["out"] = opt.out_path;
  j["total_coincidences"] = total;
  std::cout << j.dump(2) << "\n";
}

void run_fit(const Options& opt) {
  std::vector<cglmp::FringePoint> points =
      cglmp::read_fringe_csv(std::filesystem::path(opt.data_path));
  cglmp::FitOptions fit_options;
  fit_options.poisson_weighted = opt.weighted;
  fit_options.fit_gamma = opt.fit_gamma;
  cglmp::FitResult fit = cglmp::lm_fit(points, make_model(opt), fit_options);
  json j = cglmp::fit_to_json(fit, opt.precision);
  j["model"] = opt.model_name;
  j["points"] = points.size();
  emit_json(j, opt.out_path);
}

void run_scan(const Options& opt) {
  if (opt.points_a < 2) throw std::invalid_argument("need at least 2 scan points");
  cglmp::FringeScanSpec spec;
  spec.model = make_model(opt);
  spec.m1 = opt.m1;
  spec.m2 = opt.m2;
  for (int i = 0; i < opt.points_a; ++i)
    spec.theta_a.push_back(2.0 * std::numbers::pi * i / (opt.points_a - 1));
  spec.theta_b = opt.theta_b;
  std::vector<cglmp::FringePoint> points = cglmp::scan_fringe(spec);
  if (opt.out_path.empty())
    cglmp::write_fringe_csv(points, std::cout);
  else
    cglmp::write_fringe_csv(points, std::filesystem::path(opt.out_path));
}

void run_export(const Options& opt) {
  cglmp::CountTable table = cglmp::dataset(opt.state_name);
  if (opt.out_path.empty())
    cglmp::write_count_csv(table, std::cout);
  else
    cglmp::write_count_csv(table, std::filesystem::path(opt.out_path));
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Bell-test analysis for time-bin entangled qudit pairs"};
  app.require_subcommand(1);
  app.add_option("--precision", opt.precision, "Significant digits in JSON output")
      ->check(CLI::Range(1, 17));

  CLI::App* theory = app.add_subcommand("theory", "Ideal-state predictions");
  theory->require_subcommand(1);
  CLI::App* smax = theory->add_subcommand("smax", "Bell value of an ideal state");
  smax->add_option("--d", opt.d, "Local dimension")->required()->check(CLI::Range(2, 16));
  smax->add_option("--state", opt.state_name, "mes or oes");
  smax->add_option("--out", opt.out_path, "Write JSON here instead of stdout");

  CLI::App* optimize = theory->add_subcommand("optimize", "State maximizing the Bell value");
  optimize->add_option("--d", opt.d, "Local dimension")->required()->check(CLI::Range(2, 16));
  optimize->add_option("--out", opt.out_path, "Write JSON here instead of stdout");

  CLI::App* analyze = app.add_subcommand("analyze", "Counted-data analysis");
  analyze->require_subcommand(1);
  CLI::App* s4 = analyze->add_subcommand("s4", "Bell value and bootstrap error from counts");
  s4->add_option("--counts", opt.counts_path, "Count CSV file")->required();
  s4->add_option("--bootstrap", opt.bootstrap, "Bootstrap replicates (0 disables)")
      ->check(CLI::Range(0, 10000000));
  CLI::Option* seed_opt = s4->add_option("--seed", opt.seed, "Bootstrap RNG seed");
  s4->add_option("--out", opt.out_path, "Write JSON here instead of stdout");

  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo coincidence counting");
  simulate->add_option("--config", opt.config_path, "JSON run description")->required();
  simulate->add_option("--out", opt.out_path, "Output count CSV")->required();

  CLI::App* fit = app.add_subcommand("fit", "Model fitting");
  fit->require_subcommand(1);
  CLI::App* fringe = fit->add_subcommand("fringe", "Fit the coincidence fringe");
  fringe->add_option("--data", opt.data_path, "Fringe CSV file")->required();
  fringe->add_option("--model", opt.model_name, "mes or oes")->required();
  fringe->add_option("--gamma", opt.gamma, "Pump amplitude ratio for the oes model");
  fringe->add_flag("--weighted", opt.weighted, "Poisson-weighted residuals");
  fringe->add_flag("--fit-gamma", opt.fit_gamma, "Also fit gamma (oes only)");
  fringe->add_option("--out", opt.out_path, "Write JSON here instead of stdout");

  CLI::App* scan = app.add_subcommand("scan", "Model evaluation on a grid");
  scan->require_subcommand(1);
  CLI::App* scan_fringe = scan->add_subcommand("fringe", "Tabulate the model fringe");
  scan_fringe->add_option("--model", opt.model_name, "mes or oes")->required();
  scan_fringe->add_option("--gamma", opt.gamma, "Pump amplitude ratio for the oes model");
  scan_fringe->add_option("--m1", opt.m1, "Fringe amplitude scale");
  scan_fringe->add_option("--m2", opt.m2, "Flat background");
  scan_fringe->add_option("--points", opt.points_a, "Alice phase grid size over [0, 2pi]");
  scan_fringe->add_option("--theta-b", opt.theta_b, "Bob phase values")->expected(-1);
  scan_fringe->add_option("--out", opt.out_path, "Output fringe CSV (default stdout)");

  CLI::App* datasets = app.add_subcommand("datasets", "Bundled published data");
  datasets->require_subcommand(1);
  CLI::App* exp = datasets->add_subcommand("export", "Write a bundled count table");
  exp->add_option("--name", opt.state_name, "mes or oes")->required();
  exp->add_option("--out", opt.out_path, "Output count CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!*seed_opt) opt.seed = default_seed();
    if (smax->parsed()) run_theory_smax(opt);
    if (optimize->parsed()) run_theory_optimize(opt);
    if (s4->parsed()) run_analyze(opt);
    if (simulate->parsed()) run_simulate(opt);
    if (fringe->parsed()) run_fit(opt);
    if (scan_fringe->parsed()) run_scan(opt);
    if (exp->parsed()) run_export(opt);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
