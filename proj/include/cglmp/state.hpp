#ifndef CGLMP_STATE_HPP
#define CGLMP_STATE_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace cglmp {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-9;

// Single qudit state over d time-bin modes, d >= 2. Unit norm is enforced at
// construction; pass unnormalized_intermediate = true for raw amplitude
// carriers (e.g. the output of a lossy element before renormalization).
class PureState {
 public:
  explicit PureState(Vector amplitudes, bool unnormalized_intermediate = false);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex amplitude(int k) const;
  bool is_unnormalized_intermediate() const { return raw_; }

 private:
  Vector amplitudes_;
  bool raw_;
};

// Two-qudit state with equal local dimension d. Amplitude layout is
// row-major in (k_alice, k_bob): component k_alice * d + k_bob.
class BipartiteState {
 public:
  BipartiteState(int dim, Vector amplitudes);

  int dim() const { return dim_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex amplitude(int k_alice, int k_bob) const;

  // True when every off-diagonal (k_alice != k_bob) amplitude is below tol.
  bool is_schmidt_diagonal(double tol = 1e-12) const;

  // Reduced density operator of one party (0 = first, 1 = second).
  Matrix reduced_density(int party) const;

 private:
  int dim_;
  Vector amplitudes_;
};

// Relative pump intensities for successive down-conversion slots. Values are
// intensities (not amplitudes): non-negative, at least one positive. Overall
// scale is irrelevant; pump_to_state normalizes.
struct PumpProfile {
  std::vector<double> intensities;

  void validate() const;
  int dim() const { return static_cast<int>(intensities.size()); }
};

// Mixed two-qudit state, stored dense. dim() is the local dimension d; the
// matrix is d^2 x d^2 in the same (k_alice, k_bob) product ordering as
// BipartiteState.
class DensityOperator {
 public:
  DensityOperator(int dim, Matrix rho);

  int dim() const { return dim_; }
  const Matrix& matrix() const { return rho_; }

 private:
  int dim_;
  Matrix rho_;
};

// |Psi_d> = sum_k |k,k> / sqrt(d).
BipartiteState maximally_entangled(int d);

// Four-dimensional diagonal state with amplitudes (1, g, g, 1)/norm, g > 0.
BipartiteState gamma_state(double gamma);

// Schmidt-diagonal state whose coefficient on |k,k> is sqrt(intensity_k),
// normalized. Phase convention: coefficients real non-negative.
BipartiteState pump_to_state(const PumpProfile& profile);

// rho = lambda |Psi><Psi| + (1 - lambda) I / d^2, lambda in [0, 1].
DensityOperator depolarize(const BipartiteState& state, double lambda);

// Multiplies by a global phase so the first coefficient of magnitude above
// tol becomes real positive. Used to make eigenvector output reproducible.
void fix_global_phase(Vector& amplitudes, double tol = 1e-12);

}  // namespace cglmp

#endif
