#include "cglmp/bell.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "cglmp/measurement.hpp"

namespace cglmp {

namespace {

int mod(int x, int d) {
  int r = x % d;
  return r < 0 ? r + d : r;
}

// P(X = Y + z mod d) within one basis block, normalized by the block total.
// `alice_lhs` selects whether X is Alice's outcome (X = A, Y = B) or Bob's.
double conditional(const ProbabilityTable& t, int basis_a, int basis_b,
                   bool alice_lhs, int offset) {
  int d = t.dim();
  double total = t.block_sum(basis_a, basis_b);
  double sum = 0.0;
  for (int y = 0; y < d; ++y) {
    int x = mod(y + offset, d);
    if (alice_lhs)
      sum += t.at(basis_a, basis_b, x, y);
    else
      sum += t.at(basis_a, basis_b, y, x);
  }
  return sum / total;
}

// The eight conditional-probability families entering the functional, as
// (basis_a, basis_b, X-is-Alice, offset as a function of k) with sign.
double signed_terms(const ProbabilityTable& t, int k) {
  double pos = conditional(t, 0, 0, true, k) + conditional(t, 1, 0, false, k + 1) +
               conditional(t, 1, 1, true, k) + conditional(t, 0, 1, false, k);
  double neg = conditional(t, 0, 0, true, -k - 1) + conditional(t, 1, 0, false, -k) +
               conditional(t, 1, 1, true, -k - 1) +
               conditional(t, 0, 1, false, -k - 1);
  return pos - neg;
}

MeasurementSetting setting(Party party, int basis, int outcome, int d) {
  return MeasurementSetting{party, basis, outcome, d};
}

template <typename StateLike>
ProbabilityTable table_from(const StateLike& state) {
  int d = state.dim();
  ProbabilityTable table(d);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int la = 0; la < d; ++la)
        for (int lb = 0; lb < d; ++lb)
          table.at(a, b, la, lb) = joint_outcome_probability(
              state, setting(Party::Alice, a, la, d), setting(Party::Bob, b, lb, d));
  table.validate();
  return table;
}

}  // namespace

ProbabilityTable::ProbabilityTable(int d) : d_(d) {
  if (d < 2) throw std::invalid_argument("table dimension must be at least 2");
  for (auto& row : blocks_)
    for (auto& block : row) block.assign(static_cast<std::size_t>(d) * d, 0.0);
}

double& ProbabilityTable::at(int basis_a, int basis_b, int outcome_a, int outcome_b) {
  if (basis_a < 0 || basis_a > 1 || basis_b < 0 || basis_b > 1 || outcome_a < 0 ||
      outcome_a >= d_ || outcome_b < 0 || outcome_b >= d_)
    throw std::invalid_argument("table index out of range");
  return blocks_[basis_a][basis_b][static_cast<std::size_t>(outcome_a) * d_ + outcome_b];
}

double ProbabilityTable::at(int basis_a, int basis_b, int outcome_a,
                            int outcome_b) const {
  return const_cast<ProbabilityTable*>(this)->at(basis_a, basis_b, outcome_a, outcome_b);
}

double ProbabilityTable::block_sum(int basis_a, int basis_b) const {
  double sum = 0.0;
  for (int la = 0; la < d_; ++la)
    for (int lb = 0; lb < d_; ++lb) sum += at(basis_a, basis_b, la, lb);
  return sum;
}

void ProbabilityTable::validate(double tol) const {
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      for (int la = 0; la < d_; ++la)
        for (int lb = 0; lb < d_; ++lb) {
          double p = at(a, b, la, lb);
          if (!(p >= -tol && p <= 1.0 + tol) || !std::isfinite(p))
            throw std::invalid_argument("table entry outside [0, 1]");
        }
      if (std::abs(block_sum(a, b) - 1.0) > tol)
        throw std::invalid_argument("basis block does not sum to 1");
    }
}

SdResult s_value(const ProbabilityTable& table) {
  int d = table.dim();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      if (!(table.block_sum(a, b) > 0.0))
        throw std::invalid_argument("basis block has non-positive total");
  double s = 0.0;
  for (int k = 0; k < d / 2; ++k) {
    double weight = 1.0 - 2.0 * k / (d - 1.0);
    s += weight * signed_terms(table, k);
  }
  return SdResult{s, std::nullopt};
}

ProbabilityTable quantum_table(const BipartiteState& state) { return table_from(state); }

ProbabilityTable quantum_table(const DensityOperator& rho) { return table_from(rho); }

BellOperator bell_operator(int d) {
  if (d < 2) throw std::invalid_argument("dimension must be at least 2");
  Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  // Each joint projector |theta_a theta_b><theta_a theta_b| enters with the
  // summed signed weight of the conditions (same families as signed_terms)
  // its (la, lb) cell satisfies.
  Matrix op = Matrix::Zero(n, n);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int la = 0; la < d; ++la)
        for (int lb = 0; lb < d; ++lb) {
          double coeff = 0.0;
          for (int k = 0; k < d / 2; ++k) {
            double w = 1.0 - 2.0 * k / (d - 1.0);
            if (a == 0 && b == 0) {
              if (la == mod(lb + k, d)) coeff += w;
              if (la == mod(lb - k - 1, d)) coeff -= w;
            } else if (a == 1 && b == 0) {
              if (lb == mod(la + k + 1, d)) coeff += w;
              if (lb == mod(la - k, d)) coeff -= w;
            } else if (a == 1 && b == 1) {
              if (la == mod(lb + k, d)) coeff += w;
              if (la == mod(lb - k - 1, d)) coeff -= w;
            } else {
              if (lb == mod(la + k, d)) coeff += w;
              if (lb == mod(la - k - 1, d)) coeff -= w;
            }
          }
          if (coeff == 0.0) continue;
          Vector va = fourier_state(d, analyzer_phase(setting(Party::Alice, a, la, d)))
                          .amplitudes();
          Vector vb = fourier_state(d, analyzer_phase(setting(Party::Bob, b, lb, d)))
                          .amplitudes();
          Vector joint(n);
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) joint[i * d + j] = va[i] * vb[j];
          op += coeff * (joint * joint.adjoint());
        }
  // Clean up the antihermitian part left by rounding.
  op = 0.5 * (op + Matrix(op.adjoint()));
  return BellOperator{d, std::move(op)};
}

OptimizationResult optimize_state(int d) {
  BellOperator bell = bell_operator(d);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(bell.matrix);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");
  const auto& values = solver.eigenvalues();
  Eigen::Index n = values.size();
  double top = values[n - 1];
  // Collect the (near-)degenerate dominant cluster.
  double cluster_tol = 1e-9 * std::max(1.0, std::abs(top));
  Eigen::Index first = n - 1;
  while (first > 0 && top - values[first - 1] < cluster_tol) --first;
  Eigen::Index m = n - first;

  Vector best;
  if (m == 1) {
    best = solver.eigenvectors().col(n - 1);
  } else {
    // Within the cluster, pick the combination with the largest weight on
    // the Schmidt-diagonal components |k,k>: the top eigenvector of the
    // m x m Gram matrix of the diagonal-projected basis vectors.
    Matrix sub = solver.eigenvectors().rightCols(m);
    Matrix projected = Matrix::Zero(d, m);
    for (Eigen::Index c = 0; c < m; ++c)
      for (int k = 0; k < d; ++k) projected(k, c) = sub(k * d + k, c);
    Eigen::SelfAdjointEigenSolver<Matrix> gram(projected.adjoint() * projected);
    if (gram.info() != Eigen::Success)
      throw std::runtime_error("eigensolver failed to converge");
    best = sub * gram.eigenvectors().col(m - 1);
    best.normalize();
  }
  fix_global_phase(best);
  BipartiteState state(d, std::move(best));
  double s = s_value(quantum_table(state)).value;
  return OptimizationResult{std::move(state), s};
}

double critical_lambda(const BipartiteState& state) {
  double s = s_value(quantum_table(state)).value;
  if (s < 2.0)
    throw std::invalid_argument("state does not violate the local bound");
  return 2.0 / s;
}

double visibility_from_lambda(double lambda, double delta_p) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lambda must be in [0, 1]");
  if (!(delta_p > 0.0 && delta_p <= 1.0))
    throw std::invalid_argument("delta_p must be in (0, 1]");
  double a = 16.0 * delta_p * lambda;
  return a / (2.0 + lambda * (16.0 * delta_p - 2.0));
}

double lambda_from_visibility(double visibility, double delta_p) {
  if (!(visibility >= 0.0 && visibility <= 1.0))
    throw std::invalid_argument("visibility must be in [0, 1]");
  if (!(delta_p > 0.0 && delta_p <= 1.0))
    throw std::invalid_argument("delta_p must be in (0, 1]");
  double denom = 16.0 * delta_p * (1.0 - visibility) + 2.0 * visibility;
  return 2.0 * visibility / denom;
}

}  // namespace cglmp
