#include "cglmp/measurement.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cglmp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(int d) { return d >= 2 && (d & (d - 1)) == 0; }

// Column vector of the Fourier analyzer ket, exp(i k theta)/sqrt(d).
Vector fourier_vector(int d, double theta) {
  Vector v(d);
  double c = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k)
    v[k] = c * std::exp(Complex(0.0, theta * static_cast<double>(k)));
  return v;
}

Vector joint_fourier_ket(const MeasurementSetting& alice,
                         const MeasurementSetting& bob) {
  int d = alice.dim;
  Vector va = fourier_vector(d, analyzer_phase(alice));
  Vector vb = fourier_vector(d, analyzer_phase(bob));
  Vector joint(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) joint[i * d + j] = va[i] * vb[j];
  return joint;
}

void check_pair(const MeasurementSetting& alice, const MeasurementSetting& bob, int d) {
  alice.validate();
  bob.validate();
  if (alice.party != Party::Alice || bob.party != Party::Bob)
    throw std::invalid_argument("settings must be one Alice and one Bob");
  if (alice.dim != d || bob.dim != d)
    throw std::invalid_argument("setting dimension does not match the state");
}

}  // namespace

void MeasurementSetting::validate() const {
  if (dim < 2) throw std::invalid_argument("setting dimension must be at least 2");
  if (basis != 0 && basis != 1) throw std::invalid_argument("basis must be 0 or 1");
  if (outcome < 0 || outcome >= dim)
    throw std::invalid_argument("outcome must be in [0, dim)");
}

double analyzer_phase(const MeasurementSetting& setting) {
  setting.validate();
  double step = kTwoPi / static_cast<double>(setting.dim);
  if (setting.party == Party::Alice)
    return step * (static_cast<double>(setting.outcome) + kAlphaOffsets[setting.basis]);
  return step * (-static_cast<double>(setting.outcome) + kBetaOffsets[setting.basis]);
}

PureState fourier_state(int d, double theta) {
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");
  return PureState(fourier_vector(d, theta));
}

Matrix lossy_stage(int input_slots, int delay, double theta,
                   double long_arm_transmittance, MziPort port) {
  if (input_slots < 1) throw std::invalid_argument("input_slots must be positive");
  if (delay < 1) throw std::invalid_argument("delay must be positive");
  if (!(long_arm_transmittance > 0.0 && long_arm_transmittance <= 1.0))
    throw std::invalid_argument("transmittance must be in (0, 1]");
  Matrix m = Matrix::Zero(input_slots + delay, input_slots);
  double sign = (port == MziPort::X) ? 1.0 : -1.0;
  Complex delayed = sign * 0.5 * std::sqrt(long_arm_transmittance) *
                    std::exp(Complex(0.0, theta));
  for (int k = 0; k < input_slots; ++k) {
    m(k, k) = 0.5;
    m(k + delay, k) = delayed;
  }
  return m;
}

Matrix mzi_stage(int input_slots, int delay, double theta, MziPort port) {
  return lossy_stage(input_slots, delay, theta, 1.0, port);
}

Matrix cascaded_measurement(int d, double theta) {
  if (!is_power_of_two(d))
    throw std::invalid_argument("cascade requires d to be a power of two");
  Matrix op = Matrix::Identity(d, d);
  int slots = d;
  for (int delay = 1; delay < d; delay *= 2) {
    op = mzi_stage(slots, delay, static_cast<double>(delay) * theta) * op;
    slots += delay;
  }
  Matrix projected = Matrix::Zero(slots, d);
  projected.row(d - 1) = op.row(d - 1);
  return projected;
}

double joint_outcome_probability(const BipartiteState& state,
                                 const MeasurementSetting& alice,
                                 const MeasurementSetting& bob) {
  check_pair(alice, bob, state.dim());
  // Eigen's dot conjugates its first argument, giving <theta_a theta_b|psi>.
  Complex amp = joint_fourier_ket(alice, bob).dot(state.amplitudes());
  return std::norm(amp);
}

double joint_outcome_probability(const DensityOperator& rho,
                                 const MeasurementSetting& alice,
                                 const MeasurementSetting& bob) {
  check_pair(alice, bob, rho.dim());
  Vector joint = joint_fourier_ket(alice, bob);
  Complex val = joint.adjoint() * rho.matrix() * joint;
  return val.real();
}

}  // namespace cglmp
