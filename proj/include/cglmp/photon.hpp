#ifndef CGLMP_PHOTON_HPP
#define CGLMP_PHOTON_HPP

#include <cstdint>
#include <span>

#include "cglmp/count_table.hpp"
#include "cglmp/measurement.hpp"
#include "cglmp/state.hpp"

namespace cglmp {

// Source and detection parameters for one run. mu is the mean pair number
// per gate, eta_a/eta_b are end-to-end detection efficiencies (analyzer
// throughput excluded; that lives in the projection probabilities),
// dark_prob is the per-gate per-detection-slot dark count probability.
struct NoiseParams {
  double mu = 0.0;
  double eta_a = 1.0;
  double eta_b = 1.0;
  double dark_prob = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-pair projection probabilities for one fixed setting pair:
//   p_a  = P(Alice analyzer fires at her outcome slot)
//   p_b  = P(Bob analyzer fires at his outcome slot)
//   p_ab = P(both fire), i.e. the joint postselected probability.
struct MeasurementProbs {
  double p_a = 0.0;
  double p_b = 0.0;
  double p_ab = 0.0;

  void validate() const;
  double p_b_given_a() const;      // p_ab / p_a
  double p_b_given_not_a() const;  // (p_b - p_ab) / (1 - p_a)
};

MeasurementProbs measurement_probs(const BipartiteState& state,
                                   const MeasurementSetting& alice,
                                   const MeasurementSetting& bob);
MeasurementProbs measurement_probs(const DensityOperator& rho,
                                   const MeasurementSetting& alice,
                                   const MeasurementSetting& bob);

// Exact per-gate coincidence probability for Poissonian pair number mu and
// heralding efficiencies eta_a, eta_b, with pairs independent:
//   P = 1 - e^{-mu eta_a p_a} - e^{-mu eta_b p_b}
//         + e^{-mu (eta_a p_a + eta_b p_b - eta_a eta_b p_ab)}
// evaluated in expm1 form for stability at small arguments.
double exact_coincidence(double mu, double eta_a, double eta_b,
                         const MeasurementProbs& probs);
double exact_coincidence(double mu, double eta, const MeasurementProbs& probs);

// Leading-order expansion: mu eta_a eta_b (p_ab + mu p_a p_b). First term is
// the true-pair rate, second the lowest-order accidental rate.
double approx_coincidence(double mu, double eta_a, double eta_b,
                          const MeasurementProbs& probs);
double approx_coincidence(double mu, double eta, const MeasurementProbs& probs);

// Multi-pair-degraded fringe visibility of the diagonal (1, g, g, 1) state:
//   V = (1 + g)^2 / ((1 + g)^2 + mu (1 + g^2)).
double multiphoton_visibility(double mu, double gamma);

// Effective isotropic-noise weight reproducing the multi-pair background:
// lambda = 1 / (1 + mu).
double multiphoton_lambda(double mu);

struct BasisPair {
  int alice = 0;
  int bob = 0;
};

enum class PairSampling {
  Poisson,     // pair number per gate ~ Poisson(mu)
  SinglePair,  // exactly one pair per gate (single-pair limit)
};

// Gate-by-gate Monte Carlo of the full experiment: Poissonian pair number,
// heralding losses, non-photon-number-resolving detectors (multiple hits in
// one slot merge), dark counts, and coincidence tallying over all outcome
// pairs. Returns a CountTable over the schedule's basis pairs; the schedule
// must contain each (basis_a, basis_b) combination at most once.
//
// Work is split into fixed-size gate chunks with one RNG substream per
// (schedule index, chunk), so results are reproducible and independent of
// the thread count. threads = 0 picks the hardware concurrency.
CountTable simulate_experiment(const BipartiteState& state,
                               const NoiseParams& noise,
                               std::span<const BasisPair> schedule,
                               std::int64_t gates_per_setting,
                               PairSampling sampling = PairSampling::Poisson,
                               int threads = 0);

}  // namespace cglmp

#endif
