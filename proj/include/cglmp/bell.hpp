#ifndef CGLMP_BELL_HPP
#define CGLMP_BELL_HPP

#include <array>
#include <optional>
#include <vector>

#include "cglmp/state.hpp"

namespace cglmp {

// Joint outcome probabilities P(l_a, l_b | basis_a, basis_b) for the 2x2
// basis choices. Each basis block is a d x d table summing to 1.
class ProbabilityTable {
 public:
  explicit ProbabilityTable(int d);

  int dim() const { return d_; }
  double& at(int basis_a, int basis_b, int outcome_a, int outcome_b);
  double at(int basis_a, int basis_b, int outcome_a, int outcome_b) const;
  double block_sum(int basis_a, int basis_b) const;

  // Throws unless all entries are in [0, 1] and every block sums to 1
  // within tol.
  void validate(double tol = 1e-9) const;

 private:
  int d_;
  std::array<std::array<std::vector<double>, 2>, 2> blocks_;
};

struct SdResult {
  double value = 0.0;
  std::optional<double> std_error;  // set by bootstrap analysis only
};

struct BellOperator {
  int d = 0;
  Matrix matrix;  // d^2 x d^2 Hermitian
};

struct OptimizationResult {
  BipartiteState state;
  double s_max = 0.0;
};

// Bell functional for the 2-basis d-outcome inequality (local bound 2).
// Blocks are renormalized by their own sums, so count-derived tables with
// slightly different per-block totals are handled uniformly.
SdResult s_value(const ProbabilityTable& table);

// Table predicted by quantum mechanics for the standard analyzer phases.
ProbabilityTable quantum_table(const BipartiteState& state);
ProbabilityTable quantum_table(const DensityOperator& rho);

// Hermitian operator whose expectation value equals s_value(quantum_table).
BellOperator bell_operator(int d);

// Dominant eigenpair of the Bell operator: the pure state maximizing the
// violation, with the global-phase convention of fix_global_phase. Degenerate
// dominant subspaces are resolved toward the Schmidt-diagonal member.
OptimizationResult optimize_state(int d);

// Largest isotropic-noise weight at which the depolarized state stops
// violating: lambda* = 2 / S_pure. Requires s_value(quantum_table(state))
// >= 2; S_pure = 2 gives the boundary value 1.
double critical_lambda(const BipartiteState& state);

// Fringe visibility of a depolarized state whose pure fringe has peak-to-
// baseline probability swing delta_p (per coincidence, d = 4 analyzers):
//   V = 16 delta_p lambda / (2 + lambda (16 delta_p - 2)).
double visibility_from_lambda(double lambda, double delta_p);

// Inverse of visibility_from_lambda in lambda.
double lambda_from_visibility(double visibility, double delta_p);

}  // namespace cglmp

#endif
