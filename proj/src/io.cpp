#include "cglmp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cglmp/rng.hpp"

namespace cglmp {

namespace {

std::string load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  std::size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(const std::string& field) {
  std::size_t used = 0;
  std::int64_t value = std::stoll(field, &used);
  if (used != field.size()) throw std::invalid_argument("bad integer field: " + field);
  return value;
}

double parse_double(const std::string& field) {
  std::size_t used = 0;
  double value = std::stod(field, &used);
  if (used != field.size()) throw std::invalid_argument("bad numeric field: " + field);
  return value;
}

// Shared CSV scaffolding: '#'-prefixed key=value metadata, one header line,
// then data rows handed to the row callback.
template <typename RowFn>
std::map<std::string, std::string> parse_csv(std::istream& in,
                                             const std::string& expected_header,
                                             std::size_t n_fields, RowFn&& on_row) {
  std::map<std::string, std::string> metadata;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = trim(line.substr(1));
      std::size_t eq = body.find('=');
      if (eq != std::string::npos)
        metadata[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    if (!header_seen) {
      if (line != expected_header)
        throw std::invalid_argument("unexpected CSV header: " + line);
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != n_fields)
      throw std::invalid_argument("wrong number of CSV fields: " + line);
    on_row(fields);
  }
  if (!header_seen) throw std::invalid_argument("CSV header missing");
  return metadata;
}

void tally_poisson_replicate(const CountTable& counts, SplitMix64& rng,
                             CountTable& out) {
  int d = counts.dim();
  std::poisson_distribution<std::int64_t> poisson;
  using Param = std::poisson_distribution<std::int64_t>::param_type;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int la = 0; la < d; ++la)
        for (int lb = 0; lb < d; ++lb) {
          std::int64_t mean = counts.at(a, b, la, lb);
          out.at(a, b, la, lb) =
              mean > 0 ? poisson(rng, Param(static_cast<double>(mean))) : 0;
        }
}

bool all_blocks_positive(const CountTable& counts) {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (counts.block_total(a, b) <= 0) return false;
  return true;
}

}  // namespace

ProbabilityTable counts_to_probabilities(const CountTable& counts) {
  counts.validate();
  int d = counts.dim();
  ProbabilityTable table(d);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double total = static_cast<double>(counts.block_total(a, b));
      for (int la = 0; la < d; ++la)
        for (int lb = 0; lb < d; ++lb)
          table.at(a, b, la, lb) = static_cast<double>(counts.at(a, b, la, lb)) / total;
    }
  return table;
}

double AnalysisReport::violation_sigmas() const {
  if (!s4.std_error || !(*s4.std_error > 0.0))
    throw std::invalid_argument("violation significance needs a bootstrap stderr");
  return (s4.value - 2.0) / *s4.std_error;
}

AnalysisReport analyze_counts(const CountTable& counts, int bootstrap_replicates,
                              std::uint64_t seed) {
  if (bootstrap_replicates < 0)
    throw std::invalid_argument("replicate count must be non-negative");
  counts.validate();
  ProbabilityTable probs = counts_to_probabilities(counts);
  AnalysisReport report{s_value(probs), std::move(probs), bootstrap_replicates, seed};
  if (bootstrap_replicates > 1) {
    int d = counts.dim();
    std::vector<double> values(bootstrap_replicates);
    CountTable resampled(d);
    for (int r = 0; r < bootstrap_replicates; ++r) {
      bool ok = false;
      // A replicate of a sparse table can draw an empty block; retry on a
      // fresh substream so the replicate count stays fixed.
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        SplitMix64 rng(substream_seed(seed, {static_cast<std::uint64_t>(r),
                                             static_cast<std::uint64_t>(attempt)}));
        tally_poisson_replicate(counts, rng, resampled);
        ok = all_blocks_positive(resampled);
      }
      if (!ok) throw std::runtime_error("bootstrap replicate kept drawing empty blocks");
      values[r] = s_value(counts_to_probabilities(resampled)).value;
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= (values.size() - 1);
    report.s4.std_error = std::sqrt(var);
  }
  return report;
}

void write_count_csv(const CountTable& counts, std::ostream& out) {
  out << "# dimension=" << counts.dim() << "\n";
  for (const auto& [key, value] : counts.metadata())
    out << "# " << key << "=" << value << "\n";
  out << "alice_basis,bob_basis,alice_outcome,bob_outcome,count\n";
  int d = counts.dim();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int la = 0; la < d; ++la)
        for (int lb = 0; lb < d; ++lb)
          out << a << ',' << b << ',' << la << ',' << lb << ','
              << counts.at(a, b, la, lb) << "\n";
}

void write_count_csv(const CountTable& counts, const std::filesystem::path& path) {
  std::ostringstream buffer;
  write_count_csv(counts, buffer);
  atomic_write(path, buffer.str());
}

CountTable read_count_csv(std::istream& in) {
  struct Row {
    int a, b, la, lb;
    std::int64_t count;
  };
  std::vector<Row> rows;
  int d_seen = 1;
  auto metadata = parse_csv(
      in, "alice_basis,bob_basis,alice_outcome,bob_outcome,count", 5,
      [&](const std::vector<std::string>& fields) {
        Row row{static_cast<int>(parse_int(fields[0])),
                static_cast<int>(parse_int(fields[1])),
                static_cast<int>(parse_int(fields[2])),
                static_cast<int>(parse_int(fields[3])), parse_int(fields[4])};
        if (row.a < 0 || row.a > 1 || row.b < 0 || row.b > 1 || row.la < 0 ||
            row.lb < 0)
          throw std::invalid_argument("count row indices out of range");
        if (row.count < 0) throw std::invalid_argument("counts must be non-negative");
        d_seen = std::max({d_seen, row.la + 1, row.lb + 1});
        rows.push_back(row);
      });
  int d = d_seen;
  auto dim_meta = metadata.find("dimension");
  if (dim_meta != metadata.end()) {
    d = static_cast<int>(parse_int(dim_meta->second));
    if (d < d_seen) throw std::invalid_argument("outcomes exceed declared dimension");
    metadata.erase(dim_meta);
  }
  if (d < 2) throw std::invalid_argument("table dimension must be at least 2");
  CountTable counts(d);
  std::vector<bool> seen(static_cast<std::size_t>(4) * d * d, false);
  for (const Row& row : rows) {
    if (row.la >= d || row.lb >= d)
      throw std::invalid_argument("count row indices out of range");
    std::size_t idx = ((static_cast<std::size_t>(row.a) * 2 + row.b) * d + row.la) * d +
                      row.lb;
    if (seen[idx]) throw std::invalid_argument("duplicate count row");
    seen[idx] = true;
    counts.at(row.a, row.b, row.la, row.lb) = row.count;
  }
  for (bool s : seen)
    if (!s) throw std::invalid_argument("count table is missing cells");
  for (const auto& [key, value] : metadata) counts.set_metadata(key, value);
  return counts;
}

CountTable read_count_csv(const std::filesystem::path& path) {
  std::istringstream in(load_file(path));
  return read_count_csv(in);
}

std::vector<FringePoint> read_fringe_csv(std::istream& in) {
  std::vector<FringePoint> points;
  parse_csv(in, "theta_a,theta_b,counts", 3,
            [&](const std::vector<std::string>& fields) {
              points.push_back(FringePoint{parse_double(fields[0]),
                                           parse_double(fields[1]),
                                           parse_double(fields[2])});
            });
  return points;
}

std::vector<FringePoint> read_fringe_csv(const std::filesystem::path& path) {
  std::istringstream in(load_file(path));
  return read_fringe_csv(in);
}

void write_fringe_csv(std::span<const FringePoint> points, std::ostream& out) {
  out << "theta_a,theta_b,counts\n";
  char buffer[128];
  for (const FringePoint& pt : points) {
    std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g,%.17g\n", pt.theta_a,
                  pt.theta_b, pt.counts);
    out << buffer;
  }
}

void write_fringe_csv(std::span<const FringePoint> points,
                      const std::filesystem::path& path) {
  std::ostringstream buffer;
  write_fringe_csv(points, buffer);
  atomic_write(path, buffer.str());
}

std::vector<FringePoint> scan_fringe(const FringeScanSpec& spec) {
  if (spec.theta_a.empty() || spec.theta_b.empty())
    throw std::invalid_argument("scan grids must be non-empty");
  std::vector<FringePoint> points;
  points.reserve(spec.theta_a.size() * spec.theta_b.size());
  for (double tb : spec.theta_b)
    for (double ta : spec.theta_a)
      points.push_back(
          FringePoint{ta, tb, fringe_model(spec.model, ta, tb, spec.m1, spec.m2)});
  return points;
}

double round_sig(double x, int digits) {
  if (digits < 1) throw std::invalid_argument("precision must be at least 1");
  if (x == 0.0 || !std::isfinite(x)) return x;
  double magnitude = std::floor(std::log10(std::abs(x)));
  double factor = std::pow(10.0, digits - 1 - magnitude);
  return std::round(x * factor) / factor;
}

nlohmann::json report_to_json(const AnalysisReport& report, int precision) {
  nlohmann::json j;
  int d = report.probabilities.dim();
  j["dimension"] = d;
  j["s_value"] = round_sig(report.s4.value, precision);
  j["bootstrap_replicates"] = report.bootstrap_replicates;
  j["seed"] = report.seed;
  if (report.s4.std_error && *report.s4.std_error > 0.0) {
    j["std_error"] = round_sig(*report.s4.std_error, precision);
    j["violation_sigmas"] = round_sig(report.violation_sigmas(), precision);
  }
  nlohmann::json blocks = nlohmann::json::array();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      nlohmann::json block;
      block["alice_basis"] = a;
      block["bob_basis"] = b;
      nlohmann::json rows = nlohmann::json::array();
      for (int la = 0; la < d; ++la) {
        nlohmann::json row = nlohmann::json::array();
        for (int lb = 0; lb < d; ++lb)
          row.push_back(round_sig(report.probabilities.at(a, b, la, lb), precision));
        rows.push_back(row);
      }
      block["probabilities"] = rows;
      blocks.push_back(block);
    }
  j["blocks"] = blocks;
  return j;
}

nlohmann::json fit_to_json(const FitResult& fit, int precision) {
  nlohmann::json j;
  j["m1"] = round_sig(fit.m1, precision);
  j["m2"] = round_sig(fit.m2, precision);
  j["visibility"] = round_sig(fit.visibility, precision);
  j["visibility_stderr"] = round_sig(fit.visibility_stderr, precision);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["covariance"] = {{round_sig(fit.covariance(0, 0), precision),
                      round_sig(fit.covariance(0, 1), precision)},
                     {round_sig(fit.covariance(1, 0), precision),
                      round_sig(fit.covariance(1, 1), precision)}};
  if (fit.gamma) j["gamma"] = round_sig(*fit.gamma, precision);
  if (fit.gamma_stderr) j["gamma_stderr"] = round_sig(*fit.gamma_stderr, precision);
  return j;
}

namespace {

void require_keys(const nlohmann::json& j, const char* where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* name : allowed)
      if (key == name) known = true;
    if (!known)
      throw std::invalid_argument(std::string("unknown key '") + key + "' in " + where);
  }
}

BipartiteState parse_state(const nlohmann::json& j) {
  std::string type = j.at("type").get<std::string>();
  if (type == "mes") {
    require_keys(j, "state", {"type", "d"});
    return maximally_entangled(j.at("d").get<int>());
  }
  if (type == "oes") {
    require_keys(j, "state", {"type", "d", "gamma"});
    if (j.contains("d") && j.at("d").get<int>() != 4)
      throw std::invalid_argument("oes states are 4-dimensional");
    return gamma_state(j.at("gamma").get<double>());
  }
  if (type == "pump") {
    require_keys(j, "state", {"type", "intensities"});
    PumpProfile profile{j.at("intensities").get<std::vector<double>>()};
    return pump_to_state(profile);
  }
  throw std::invalid_argument("unknown state type: " + type);
}

}  // namespace

SimulationConfig parse_simulation_config(const nlohmann::json& j) {
  require_keys(j, "config",
               {"state", "noise", "schedule", "gates_per_setting", "pair_sampling",
                "threads"});
  SimulationConfig config{parse_state(j.at("state")), NoiseParams{}, {}, 0,
                          PairSampling::Poisson, 0};

  const nlohmann::json& noise = j.at("noise");
  require_keys(noise, "noise", {"mu", "eta_a", "eta_b", "dark_prob", "seed"});
  config.noise.mu = noise.at("mu").get<double>();
  config.noise.eta_a = noise.at("eta_a").get<double>();
  config.noise.eta_b = noise.at("eta_b").get<double>();
  config.noise.dark_prob = noise.value("dark_prob", 0.0);
  config.noise.seed = noise.value("seed", std::uint64_t{0});
  config.noise.validate();

  for (const auto& entry : j.at("schedule")) {
    if (!entry.is_array() || entry.size() != 2)
      throw std::invalid_argument("schedule entries must be [alice_basis, bob_basis]");
    config.schedule.push_back(BasisPair{entry[0].get<int>(), entry[1].get<int>()});
  }
  config.gates_per_setting = j.at("gates_per_setting").get<std::int64_t>();

  std::string sampling = j.value("pair_sampling", std::string("poisson"));
  if (sampling == "poisson")
    config.sampling = PairSampling::Poisson;
  else if (sampling == "single_pair")
    config.sampling = PairSampling::SinglePair;
  else
    throw std::invalid_argument("unknown pair_sampling: " + sampling);

  config.threads = j.value("threads", 0);
  if (config.threads < 0) throw std::invalid_argument("threads must be non-negative");
  return config;
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
  nlohmann::json j = nlohmann::json::parse(load_file(path));
  return parse_simulation_config(j);
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cglmp
