#include "cglmp/photon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cglmp/rng.hpp"

namespace cglmp {

namespace {

constexpr std::int64_t kChunkGates = std::int64_t{1} << 20;
constexpr int kMaxSimDim = 32;  // outcome bitmasks are 32 bits wide

Matrix reduced_from_density(const Matrix& rho, int d, int party) {
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        if (party == 0)
          out(i, j) += rho(i * d + k, j * d + k);
        else
          out(i, j) += rho(k * d + i, k * d + j);
      }
  return out;
}

Vector fourier_vector(int d, double theta) {
  Vector v(d);
  double c = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k)
    v[k] = c * std::exp(Complex(0.0, theta * static_cast<double>(k)));
  return v;
}

// Success probability of one postselected analyzer on the local state:
// (1/d) <theta| rho_local |theta>, the 1/d being the cascade throughput.
double single_side_prob(const Matrix& rho_local, int d, double theta) {
  Vector v = fourier_vector(d, theta);
  Complex val = v.adjoint() * rho_local * v;
  return val.real() / static_cast<double>(d);
}

MeasurementProbs assemble_probs(const Matrix& rho_a, const Matrix& rho_b,
                                double joint, const MeasurementSetting& alice,
                                const MeasurementSetting& bob) {
  int d = alice.dim;
  MeasurementProbs p;
  p.p_a = single_side_prob(rho_a, d, analyzer_phase(alice));
  p.p_b = single_side_prob(rho_b, d, analyzer_phase(bob));
  p.p_ab = joint / (static_cast<double>(d) * d);
  p.validate();
  return p;
}

// Zero-truncated Poisson CDF table for the pair number of non-empty gates.
std::vector<double> truncated_poisson_cdf(double mu) {
  std::vector<double> cdf;
  double denom = -std::expm1(-mu);
  double term = mu * std::exp(-mu);  // P(N = 1)
  double cum = 0.0;
  for (int n = 1; n <= 64; ++n) {
    cum += term / denom;
    cdf.push_back(cum);
    if (cum >= 1.0 - 1e-15) break;
    term *= mu / static_cast<double>(n + 1);
  }
  cdf.back() = 1.0;
  return cdf;
}

int sample_from_cdf(const std::vector<double>& cdf, double u) {
  return static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

// Dark counts are rare, so gates are first classified by "any dark at all";
// only those sample the dark multiplicity (truncated binomial over the 2d
// slots) and slot placement.
struct DarkSampler {
  int d = 0;
  double prob_any = 0.0;
  std::vector<double> count_cdf;  // P(T = t | T >= 1), t = 1 .. 2d

  DarkSampler(int dim, double dark_prob) : d(dim) {
    int slots = 2 * d;
    prob_any = -std::expm1(static_cast<double>(slots) * std::log1p(-dark_prob));
    if (prob_any <= 0.0) return;
    double log_keep = std::log1p(-dark_prob);
    double log_dark = std::log(dark_prob);
    double cum = 0.0;
    for (int t = 1; t <= slots; ++t) {
      double log_comb = std::lgamma(slots + 1.0) - std::lgamma(t + 1.0) -
                        std::lgamma(slots - t + 1.0);
      cum += std::exp(log_comb + t * log_dark + (slots - t) * log_keep) / prob_any;
      count_cdf.push_back(cum);
    }
    count_cdf.back() = 1.0;
  }

  void apply(SplitMix64& rng, std::uint32_t& fired_a, std::uint32_t& fired_b) const {
    int t = 1 + sample_from_cdf(count_cdf, rng.uniform01());
    int slots = 2 * d;
    std::array<int, 2 * kMaxSimDim> idx;
    for (int i = 0; i < slots; ++i) idx[i] = i;
    for (int i = 0; i < t; ++i) {  // partial Fisher-Yates
      int j = i + static_cast<int>(rng.uniform01() * (slots - i));
      std::swap(idx[i], idx[j]);
      if (idx[i] < d)
        fired_a |= std::uint32_t{1} << idx[i];
      else
        fired_b |= std::uint32_t{1} << (idx[i] - d);
    }
  }
};

// Per-pair detection category distribution for one basis pair, as a
// cumulative array: entry 0 is "no click", then d*d joint cells, then d
// Alice-only and d Bob-only categories.
struct CategorySampler {
  int d = 0;
  std::vector<double> cumulative;

  CategorySampler(int dim, const std::vector<double>& q_joint,
                  const std::vector<double>& q_a, const std::vector<double>& q_b,
                  double eta_a, double eta_b)
      : d(dim) {
    std::vector<double> probs;
    probs.reserve(1 + static_cast<std::size_t>(d) * d + 2 * d);
    probs.push_back(0.0);  // placeholder for the no-click remainder
    for (int la = 0; la < d; ++la)
      for (int lb = 0; lb < d; ++lb)
        probs.push_back(eta_a * eta_b * q_joint[la * d + lb]);
    for (int la = 0; la < d; ++la) {
      double row = 0.0;
      for (int lb = 0; lb < d; ++lb) row += q_joint[la * d + lb];
      probs.push_back(eta_a * (q_a[la] - eta_b * row));
    }
    for (int lb = 0; lb < d; ++lb) {
      double col = 0.0;
      for (int la = 0; la < d; ++la) col += q_joint[la * d + lb];
      probs.push_back(eta_b * (q_b[lb] - eta_a * col));
    }
    double rest = 0.0;
    for (double p : probs) {
      if (p < -1e-12) throw std::runtime_error("negative category probability");
      rest += std::max(p, 0.0);
    }
    probs[0] = 1.0 - rest;
    if (probs[0] < -1e-9) throw std::runtime_error("category probabilities exceed 1");
    cumulative.resize(probs.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += std::max(probs[i], 0.0);
      cumulative[i] = cum;
    }
    cumulative.back() = 1.0;
  }

  // Returns false for no click; otherwise sets one bit on the fired masks.
  bool sample(SplitMix64& rng, std::uint32_t& fired_a, std::uint32_t& fired_b) const {
    double u = rng.uniform01();
    if (u < cumulative[0]) return false;
    int idx = sample_from_cdf(cumulative, u);
    int cells = d * d;
    if (idx <= cells) {
      int cell = idx - 1;
      fired_a |= std::uint32_t{1} << (cell / d);
      fired_b |= std::uint32_t{1} << (cell % d);
    } else if (idx <= cells + d) {
      fired_a |= std::uint32_t{1} << (idx - cells - 1);
    } else {
      fired_b |= std::uint32_t{1} << (idx - cells - d - 1);
    }
    return true;
  }
};

struct BlockTask {
  CategorySampler categories;
  std::vector<double> pair_count_cdf;  // zero-truncated Poisson
  double prob_nonempty = 0.0;
  std::int64_t gates = 0;
};

void run_chunk(const BlockTask& task, const DarkSampler* darks, bool single_pair,
               std::uint64_t chunk_seed, std::int64_t chunk_gates,
               std::vector<std::int64_t>& counts) {
  SplitMix64 rng(chunk_seed);
  int d = task.categories.d;
  std::int64_t nonempty = chunk_gates;
  if (!single_pair) {
    std::binomial_distribution<std::int64_t> dist(chunk_gates, task.prob_nonempty);
    nonempty = dist(rng);
  }
  for (std::int64_t g = 0; g < nonempty; ++g) {
    std::uint32_t fired_a = 0, fired_b = 0;
    int pairs = single_pair
                    ? 1
                    : 1 + sample_from_cdf(task.pair_count_cdf, rng.uniform01());
    for (int p = 0; p < pairs; ++p) task.categories.sample(rng, fired_a, fired_b);
    if (darks && rng.uniform01() < darks->prob_any) darks->apply(rng, fired_a, fired_b);
    if (fired_a == 0 || fired_b == 0) continue;
    for (std::uint32_t ma = fired_a; ma != 0; ma &= ma - 1) {
      int la = std::countr_zero(ma);
      for (std::uint32_t mb = fired_b; mb != 0; mb &= mb - 1)
        counts[static_cast<std::size_t>(la) * d + std::countr_zero(mb)]++;
    }
  }
  // Empty gates can still produce dark-dark coincidences.
  if (darks && !single_pair) {
    std::int64_t empty = chunk_gates - nonempty;
    std::binomial_distribution<std::int64_t> dist(empty, darks->prob_any);
    std::int64_t with_darks = dist(rng);
    for (std::int64_t g = 0; g < with_darks; ++g) {
      std::uint32_t fired_a = 0, fired_b = 0;
      darks->apply(rng, fired_a, fired_b);
      if (fired_a == 0 || fired_b == 0) continue;
      for (std::uint32_t ma = fired_a; ma != 0; ma &= ma - 1) {
        int la = std::countr_zero(ma);
        for (std::uint32_t mb = fired_b; mb != 0; mb &= mb - 1)
          counts[static_cast<std::size_t>(la) * d + std::countr_zero(mb)]++;
      }
    }
  }
}

}  // namespace

void NoiseParams::validate() const {
  if (!(mu >= 0.0) || !std::isfinite(mu))
    throw std::invalid_argument("mu must be finite and non-negative");
  if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
    throw std::invalid_argument("efficiencies must be in [0, 1]");
  if (!(dark_prob >= 0.0 && dark_prob < 1.0))
    throw std::invalid_argument("dark_prob must be in [0, 1)");
}

void MeasurementProbs::validate() const {
  constexpr double tol = 1e-12;
  if (!(p_a >= -tol && p_a <= 1.0 + tol) || !(p_b >= -tol && p_b <= 1.0 + tol))
    throw std::invalid_argument("single-side probabilities must be in [0, 1]");
  if (p_ab < -tol || p_ab > std::min(p_a, p_b) + tol)
    throw std::invalid_argument("joint probability must be in [0, min(p_a, p_b)]");
}

double MeasurementProbs::p_b_given_a() const {
  if (p_a <= 0.0) throw std::invalid_argument("p_a is zero");
  return p_ab / p_a;
}

double MeasurementProbs::p_b_given_not_a() const {
  if (p_a >= 1.0) throw std::invalid_argument("p_a is one");
  return (p_b - p_ab) / (1.0 - p_a);
}

MeasurementProbs measurement_probs(const BipartiteState& state,
                                   const MeasurementSetting& alice,
                                   const MeasurementSetting& bob) {
  return assemble_probs(state.reduced_density(0), state.reduced_density(1),
                        joint_outcome_probability(state, alice, bob), alice, bob);
}

MeasurementProbs measurement_probs(const DensityOperator& rho,
                                   const MeasurementSetting& alice,
                                   const MeasurementSetting& bob) {
  int d = rho.dim();
  return assemble_probs(reduced_from_density(rho.matrix(), d, 0),
                        reduced_from_density(rho.matrix(), d, 1),
                        joint_outcome_probability(rho, alice, bob), alice, bob);
}

double exact_coincidence(double mu, double eta_a, double eta_b,
                         const MeasurementProbs& probs) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
    throw std::invalid_argument("efficiencies must be in [0, 1]");
  probs.validate();
  double a = mu * eta_a * probs.p_a;
  double b = mu * eta_b * probs.p_b;
  double c = mu * (eta_a * probs.p_a + eta_b * probs.p_b - eta_a * eta_b * probs.p_ab);
  return -std::expm1(-a) - std::exp(-c) * std::expm1(c - b);
}

double exact_coincidence(double mu, double eta, const MeasurementProbs& probs) {
  return exact_coincidence(mu, eta, eta, probs);
}

double approx_coincidence(double mu, double eta_a, double eta_b,
                          const MeasurementProbs& probs) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
    throw std::invalid_argument("efficiencies must be in [0, 1]");
  probs.validate();
  return mu * eta_a * eta_b * (probs.p_ab + mu * probs.p_a * probs.p_b);
}

double approx_coincidence(double mu, double eta, const MeasurementProbs& probs) {
  return approx_coincidence(mu, eta, eta, probs);
}

double multiphoton_visibility(double mu, double gamma) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  double peak = (1.0 + gamma) * (1.0 + gamma);
  return peak / (peak + mu * (1.0 + gamma * gamma));
}

double multiphoton_lambda(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be non-negative");
  return 1.0 / (1.0 + mu);
}

CountTable simulate_experiment(const BipartiteState& state, const NoiseParams& noise,
                               std::span<const BasisPair> schedule,
                               std::int64_t gates_per_setting, PairSampling sampling,
                               int threads) {
  noise.validate();
  int d = state.dim();
  if (d > kMaxSimDim) throw std::invalid_argument("simulation supports d up to 32");
  if (schedule.empty()) throw std::invalid_argument("schedule is empty");
  if (gates_per_setting <= 0)
    throw std::invalid_argument("gates_per_setting must be positive");
  bool seen[2][2] = {};
  for (const BasisPair& pair : schedule) {
    if (pair.alice < 0 || pair.alice > 1 || pair.bob < 0 || pair.bob > 1)
      throw std::invalid_argument("basis indices must be 0 or 1");
    if (seen[pair.alice][pair.bob])
      throw std::invalid_argument("schedule repeats a basis pair");
    seen[pair.alice][pair.bob] = true;
  }
  if (sampling == PairSampling::Poisson && !(noise.mu > 0.0) && !(noise.dark_prob > 0.0))
    throw std::invalid_argument("mu = 0 with no dark counts produces no events");

  Matrix rho_a = state.reduced_density(0);
  Matrix rho_b = state.reduced_density(1);

  std::vector<BlockTask> tasks;
  tasks.reserve(schedule.size());
  for (const BasisPair& pair : schedule) {
    std::vector<double> q_joint(static_cast<std::size_t>(d) * d);
    std::vector<double> q_a(d), q_b(d);
    for (int la = 0; la < d; ++la) {
      MeasurementSetting sa{Party::Alice, pair.alice, la, d};
      q_a[la] = single_side_prob(rho_a, d, analyzer_phase(sa));
      for (int lb = 0; lb < d; ++lb) {
        MeasurementSetting sb{Party::Bob, pair.bob, lb, d};
        q_joint[static_cast<std::size_t>(la) * d + lb] =
            joint_outcome_probability(state, sa, sb) / (static_cast<double>(d) * d);
      }
    }
    for (int lb = 0; lb < d; ++lb) {
      MeasurementSetting sb{Party::Bob, pair.bob, lb, d};
      q_b[lb] = single_side_prob(rho_b, d, analyzer_phase(sb));
    }
    BlockTask task{CategorySampler(d, q_joint, q_a, q_b, noise.eta_a, noise.eta_b),
                   {},
                   0.0,
                   gates_per_setting};
    if (sampling == PairSampling::Poisson && noise.mu > 0.0) {
      task.pair_count_cdf = truncated_poisson_cdf(noise.mu);
      task.prob_nonempty = -std::expm1(-noise.mu);
    }
    tasks.push_back(std::move(task));
  }

  DarkSampler darks(d, noise.dark_prob);
  const DarkSampler* dark_ptr = noise.dark_prob > 0.0 ? &darks : nullptr;
  bool single_pair = sampling == PairSampling::SinglePair;

  int worker_count = threads > 0
                         ? threads
                         : std::max(1u, std::thread::hardware_concurrency());

  CountTable result(d);
  for (std::size_t block = 0; block < tasks.size(); ++block) {
    const BlockTask& task = tasks[block];
    std::int64_t n_chunks = (task.gates + kChunkGates - 1) / kChunkGates;
    std::vector<std::vector<std::int64_t>> partials(
        worker_count, std::vector<std::int64_t>(static_cast<std::size_t>(d) * d, 0));
    auto worker = [&](int w) {
      for (std::int64_t c = w; c < n_chunks; c += worker_count) {
        std::int64_t chunk = std::min(kChunkGates, task.gates - c * kChunkGates);
        std::uint64_t chunk_seed = substream_seed(
            noise.seed, {static_cast<std::uint64_t>(block), static_cast<std::uint64_t>(c)});
        run_chunk(task, dark_ptr, single_pair, chunk_seed, chunk, partials[w]);
      }
    };
    if (worker_count == 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(worker_count);
      for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker, w);
      for (auto& t : pool) t.join();
    }
    const BasisPair& pair = schedule[block];
    for (int la = 0; la < d; ++la)
      for (int lb = 0; lb < d; ++lb) {
        std::int64_t total = 0;
        for (const auto& partial : partials)
          total += partial[static_cast<std::size_t>(la) * d + lb];
        result.at(pair.alice, pair.bob, la, lb) = total;
      }
  }

  result.set_metadata("mu", std::to_string(noise.mu));
  result.set_metadata("eta_a", std::to_string(noise.eta_a));
  result.set_metadata("eta_b", std::to_string(noise.eta_b));
  result.set_metadata("dark_prob", std::to_string(noise.dark_prob));
  result.set_metadata("seed", std::to_string(noise.seed));
  result.set_metadata("gates_per_setting", std::to_string(gates_per_setting));
  result.set_metadata("pair_sampling",
                      single_pair ? std::string("single_pair") : std::string("poisson"));
  return result;
}

}  // namespace cglmp
