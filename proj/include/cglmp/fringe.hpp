#ifndef CGLMP_FRINGE_HPP
#define CGLMP_FRINGE_HPP

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cglmp {

enum class FringeKind { Mes, Oes };

// Coincidence-probability fringe of the d = 4 analyzer pair as a function of
// the summed analyzer phase phi = theta_a + theta_b:
//   Mes:        P = (1/4) cos^2(phi/2) cos^2(phi)
//   Oes(gamma): P = (cos(3 phi / 2) + gamma cos(phi / 2))^2
//                   / (8 (1 + gamma^2))
class FringeModel {
 public:
  static FringeModel mes();
  static FringeModel oes(double gamma);

  FringeKind kind() const { return kind_; }
  double gamma() const { return gamma_; }

  // Peak-to-minimum probability swing: 1/4 for Mes,
  // (1 + gamma)^2 / (8 (1 + gamma^2)) for Oes.
  double delta_p() const;

  double probability(double theta_a, double theta_b) const;
  double probability_with_gamma(double theta_a, double theta_b, double gamma) const;

 private:
  FringeModel(FringeKind kind, double gamma) : kind_(kind), gamma_(gamma) {}
  FringeKind kind_;
  double gamma_;
};

// Expected counts m1 * P(theta_a, theta_b) / delta_p + m2, so m1 is the
// fringe amplitude in counts and m2 the flat background.
double fringe_model(const FringeModel& model, double theta_a, double theta_b,
                    double m1, double m2);

struct FringePoint {
  double theta_a = 0.0;
  double theta_b = 0.0;
  double counts = 0.0;
};

struct FitOptions {
  bool poisson_weighted = false;  // weight residuals by 1/max(model, 1)
  bool fit_gamma = false;         // also fit gamma (Oes model only)
  double damping_init = 1e-3;
  int max_iterations = 200;
  // Override the default start (m1 = max - min, m2 = min); for diagnostics.
  std::optional<std::array<double, 2>> start;
};

struct FitResult {
  double m1 = 0.0;
  double m2 = 0.0;
  double visibility = 0.0;  // m1 / (m1 + 2 m2)
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // for (m1, m2)
  double visibility_stderr = 0.0;
  bool converged = false;
  int iterations = 0;
  std::optional<double> gamma;         // set when fit_gamma
  std::optional<double> gamma_stderr;  // set when fit_gamma
};

// Levenberg-Marquardt fit of the fringe model to measured counts. Damping
// starts at damping_init, x10 on a rejected step, /10 on an accepted one;
// stops when the relative cost change, the gradient norm, or the relative
// step size falls below 1e-12, or after max_iterations. Covariance is
// (J^T W J)^{-1} scaled by the reduced sum of squares.
FitResult lm_fit(std::span<const FringePoint> data, const FringeModel& model,
                 const FitOptions& options = {});

// Visibility below which the depolarized version of the model's source state
// no longer violates the inequality.
double critical_visibility(const FringeModel& model);

}  // namespace cglmp

#endif
