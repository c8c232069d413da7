#include "cglmp/state.hpp"

#include <cmath>
#include <stdexcept>

namespace cglmp {

namespace {

void check_dim(int d) {
  if (d < 2) throw std::invalid_argument("local dimension must be at least 2");
}

void check_norm(const Vector& amplitudes) {
  double n = amplitudes.norm();
  if (std::abs(n - 1.0) > kNormTolerance)
    throw std::invalid_argument("state amplitudes are not unit norm");
}

}  // namespace

PureState::PureState(Vector amplitudes, bool unnormalized_intermediate)
    : amplitudes_(std::move(amplitudes)), raw_(unnormalized_intermediate) {
  check_dim(static_cast<int>(amplitudes_.size()));
  if (!raw_) check_norm(amplitudes_);
}

Complex PureState::amplitude(int k) const {
  if (k < 0 || k >= dim()) throw std::invalid_argument("amplitude index out of range");
  return amplitudes_[k];
}

BipartiteState::BipartiteState(int dim, Vector amplitudes)
    : dim_(dim), amplitudes_(std::move(amplitudes)) {
  check_dim(dim_);
  if (amplitudes_.size() != static_cast<Eigen::Index>(dim_) * dim_)
    throw std::invalid_argument("bipartite amplitude vector must have length d^2");
  check_norm(amplitudes_);
}

Complex BipartiteState::amplitude(int k_alice, int k_bob) const {
  if (k_alice < 0 || k_alice >= dim_ || k_bob < 0 || k_bob >= dim_)
    throw std::invalid_argument("amplitude index out of range");
  return amplitudes_[k_alice * dim_ + k_bob];
}

bool BipartiteState::is_schmidt_diagonal(double tol) const {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (i != j && std::abs(amplitudes_[i * dim_ + j]) > tol) return false;
  return true;
}

Matrix BipartiteState::reduced_density(int party) const {
  if (party != 0 && party != 1) throw std::invalid_argument("party must be 0 or 1");
  Matrix rho = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      for (int k = 0; k < dim_; ++k) {
        if (party == 0)
          rho(i, j) += amplitudes_[i * dim_ + k] * std::conj(amplitudes_[j * dim_ + k]);
        else
          rho(i, j) += amplitudes_[k * dim_ + i] * std::conj(amplitudes_[k * dim_ + j]);
      }
  return rho;
}

void PumpProfile::validate() const {
  if (intensities.size() < 2)
    throw std::invalid_argument("pump profile needs at least 2 slots");
  bool any_positive = false;
  for (double v : intensities) {
    if (v < 0.0 || !std::isfinite(v))
      throw std::invalid_argument("pump intensities must be finite and non-negative");
    if (v > 0.0) any_positive = true;
  }
  if (!any_positive)
    throw std::invalid_argument("pump profile must have a positive entry");
}

DensityOperator::DensityOperator(int dim, Matrix rho)
    : dim_(dim), rho_(std::move(rho)) {
  check_dim(dim_);
  Eigen::Index n = static_cast<Eigen::Index>(dim_) * dim_;
  if (rho_.rows() != n || rho_.cols() != n)
    throw std::invalid_argument("density matrix must be d^2 x d^2");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("density matrix must be Hermitian");
  if (std::abs(rho_.trace().real() - 1.0) > 1e-9 || std::abs(rho_.trace().imag()) > 1e-12)
    throw std::invalid_argument("density matrix must have unit trace");
}

BipartiteState maximally_entangled(int d) {
  check_dim(d);
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(d) * d);
  double c = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) amps[k * d + k] = c;
  return BipartiteState(d, std::move(amps));
}

BipartiteState gamma_state(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be positive");
  PumpProfile profile{{1.0, gamma * gamma, gamma * gamma, 1.0}};
  return pump_to_state(profile);
}

BipartiteState pump_to_state(const PumpProfile& profile) {
  profile.validate();
  int d = profile.dim();
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(d) * d);
  double total = 0.0;
  for (double v : profile.intensities) total += v;
  for (int k = 0; k < d; ++k)
    amps[k * d + k] = std::sqrt(profile.intensities[k] / total);
  return BipartiteState(d, std::move(amps));
}

DensityOperator depolarize(const BipartiteState& state, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must be in [0, 1]");
  int d = state.dim();
  Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  Matrix rho = lambda * (state.amplitudes() * state.amplitudes().adjoint());
  rho += ((1.0 - lambda) / static_cast<double>(n)) * Matrix::Identity(n, n);
  return DensityOperator(d, std::move(rho));
}

void fix_global_phase(Vector& amplitudes, double tol) {
  for (Eigen::Index k = 0; k < amplitudes.size(); ++k) {
    double mag = std::abs(amplitudes[k]);
    if (mag > tol) {
      Complex phase = amplitudes[k] / mag;
      amplitudes /= phase;
      amplitudes[k] = Complex(mag, 0.0);
      return;
    }
  }
}

}  // namespace cglmp
