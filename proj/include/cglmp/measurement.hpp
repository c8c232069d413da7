#ifndef CGLMP_MEASUREMENT_HPP
#define CGLMP_MEASUREMENT_HPP

#include <array>

#include "cglmp/state.hpp"

namespace cglmp {

enum class Party { Alice, Bob };

// Fractional phase offsets per basis index: Alice uses {0, 1/2}, Bob uses
// {1/4, -1/4}, in units of the 2pi/d outcome step.
inline constexpr std::array<double, 2> kAlphaOffsets{0.0, 0.5};
inline constexpr std::array<double, 2> kBetaOffsets{0.25, -0.25};

struct MeasurementSetting {
  Party party;
  int basis;    // 0 or 1
  int outcome;  // 0 .. dim-1
  int dim;      // local dimension d >= 2

  void validate() const;
};

// Analyzer phase for one setting:
//   Alice: (2pi/d) * ( outcome + alpha_basis)
//   Bob:   (2pi/d) * (-outcome + beta_basis)
double analyzer_phase(const MeasurementSetting& setting);

// |theta> with amplitudes exp(i k theta) / sqrt(d), k = 0 .. d-1.
PureState fourier_state(int d, double theta);

enum class MziPort { X, Y };

// Transfer matrix of one delay-line interferometer stage acting on
// input_slots time bins: the short arm keeps the bin, the long arm delays it
// by `delay` bins and applies phase theta. Output has input_slots + delay
// bins. Port X carries the + superposition, port Y the - one; each entry has
// magnitude 1/2 so that the two ports together are trace preserving.
Matrix mzi_stage(int input_slots, int delay, double theta, MziPort port = MziPort::X);

// Same stage with amplitude transmittance sqrt(long_arm_transmittance) on
// the delayed arm, long_arm_transmittance in (0, 1].
Matrix lossy_stage(int input_slots, int delay, double theta,
                   double long_arm_transmittance, MziPort port = MziPort::X);

// Full analyzer for d = 2^n: stages with delays 1, 2, ..., 2^(n-1) and
// phases theta, 2 theta, ..., 2^(n-1) theta, all on port X, then projection
// onto output slot d-1. Returns the (2d-1) x d transfer matrix with only row
// d-1 nonzero; that row equals (sqrt(d)/2^n) e^{i (d-1) theta} <theta|.
Matrix cascaded_measurement(int d, double theta);

// P(outcome_a, outcome_b) for projective Fourier-basis analyzers at the
// phases determined by the settings. Sums to 1 over outcomes for fixed
// bases.
double joint_outcome_probability(const BipartiteState& state,
                                 const MeasurementSetting& alice,
                                 const MeasurementSetting& bob);
double joint_outcome_probability(const DensityOperator& rho,
                                 const MeasurementSetting& alice,
                                 const MeasurementSetting& bob);

}  // namespace cglmp

#endif
