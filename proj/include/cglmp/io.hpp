#ifndef CGLMP_IO_HPP
#define CGLMP_IO_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cglmp/bell.hpp"
#include "cglmp/count_table.hpp"
#include "cglmp/fringe.hpp"
#include "cglmp/photon.hpp"

namespace cglmp {

// Normalizes each basis block by its own total. Every block total must be
// positive.
ProbabilityTable counts_to_probabilities(const CountTable& counts);

struct AnalysisReport {
  SdResult s4;
  ProbabilityTable probabilities;
  int bootstrap_replicates = 0;
  std::uint64_t seed = 0;

  // (S - 2) / stderr, recomputed from the stored fields. Requires a
  // bootstrap stderr.
  double violation_sigmas() const;
};

// Point estimate plus optional parametric bootstrap: replicate r redraws
// every cell as Poisson(count) from substream (seed, r), and std_error is
// the sample standard deviation of the replicate S values.
AnalysisReport analyze_counts(const CountTable& counts, int bootstrap_replicates,
                              std::uint64_t seed);

// Bundled published count tables ("mes", "oes"), d = 4.
CountTable dataset(std::string_view name);

// CSV with '#'-prefixed "key=value" metadata lines, then a header
//   alice_basis,bob_basis,alice_outcome,bob_outcome,count
// and one row per cell. Reading back a written table reproduces counts,
// dimension, and metadata exactly.
void write_count_csv(const CountTable& counts, std::ostream& out);
void write_count_csv(const CountTable& counts, const std::filesystem::path& path);
CountTable read_count_csv(std::istream& in);
CountTable read_count_csv(const std::filesystem::path& path);

// Fringe sample CSV: metadata lines, then
//   theta_a,theta_b,counts
std::vector<FringePoint> read_fringe_csv(std::istream& in);
std::vector<FringePoint> read_fringe_csv(const std::filesystem::path& path);
void write_fringe_csv(std::span<const FringePoint> points, std::ostream& out);
void write_fringe_csv(std::span<const FringePoint> points,
                      const std::filesystem::path& path);

// Evaluates the scaled model fringe m1 * P / delta_p + m2 on the outer
// product of the theta grids; defaults give the normalized fringe shape.
struct FringeScanSpec {
  FringeModel model = FringeModel::mes();
  std::vector<double> theta_a;
  std::vector<double> theta_b;  // outer product with theta_a
  double m1 = 1.0;
  double m2 = 0.0;
};
std::vector<FringePoint> scan_fringe(const FringeScanSpec& spec);

// JSON serialization for CLI output. precision is significant digits.
nlohmann::json report_to_json(const AnalysisReport& report, int precision);
nlohmann::json fit_to_json(const FitResult& fit, int precision);
double round_sig(double x, int digits);

// Monte Carlo run description, parsed from JSON with unknown-key rejection.
struct SimulationConfig {
  BipartiteState state;
  NoiseParams noise;
  std::vector<BasisPair> schedule;
  std::int64_t gates_per_setting = 0;
  PairSampling sampling = PairSampling::Poisson;
  int threads = 0;
};
SimulationConfig parse_simulation_config(const nlohmann::json& j);
SimulationConfig load_simulation_config(const std::filesystem::path& path);

// Writes to a temp file in the target directory, then renames into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace cglmp

#endif
