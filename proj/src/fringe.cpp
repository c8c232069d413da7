#include "cglmp/fringe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cglmp/bell.hpp"
#include "cglmp/state.hpp"

namespace cglmp {

namespace {

double oes_bracket(double phi, double gamma) {
  return std::cos(1.5 * phi) + gamma * std::cos(0.5 * phi);
}

// Normalized fringe shape f = P / delta_p and its gamma derivative. For the
// Mes model f = cos^2(phi/2) cos^2(phi); for Oes f = u^2 / (1 + gamma)^2
// with u = cos(3 phi / 2) + gamma cos(phi / 2).
double shape(FringeKind kind, double phi, double gamma) {
  if (kind == FringeKind::Mes) {
    double c1 = std::cos(0.5 * phi), c2 = std::cos(phi);
    return c1 * c1 * c2 * c2;
  }
  double u = oes_bracket(phi, gamma);
  double s = 1.0 + gamma;
  return u * u / (s * s);
}

double shape_dgamma(double phi, double gamma) {
  double u = oes_bracket(phi, gamma);
  double s = 1.0 + gamma;
  return 2.0 * u * std::cos(0.5 * phi) / (s * s) - 2.0 * u * u / (s * s * s);
}

}  // namespace

FringeModel FringeModel::mes() { return FringeModel(FringeKind::Mes, 1.0); }

FringeModel FringeModel::oes(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw std::invalid_argument("gamma must be positive");
  return FringeModel(FringeKind::Oes, gamma);
}

double FringeModel::delta_p() const {
  if (kind_ == FringeKind::Mes) return 0.25;
  double s = 1.0 + gamma_;
  return s * s / (8.0 * (1.0 + gamma_ * gamma_));
}

double FringeModel::probability(double theta_a, double theta_b) const {
  return probability_with_gamma(theta_a, theta_b, gamma_);
}

double FringeModel::probability_with_gamma(double theta_a, double theta_b,
                                           double gamma) const {
  double phi = theta_a + theta_b;
  if (kind_ == FringeKind::Mes) return 0.25 * shape(kind_, phi, gamma);
  double u = oes_bracket(phi, gamma);
  return u * u / (8.0 * (1.0 + gamma * gamma));
}

double fringe_model(const FringeModel& model, double theta_a, double theta_b,
                    double m1, double m2) {
  return m1 * shape(model.kind(), theta_a + theta_b, model.gamma()) + m2;
}

FitResult lm_fit(std::span<const FringePoint> data, const FringeModel& model,
                 const FitOptions& options) {
  if (options.fit_gamma && model.kind() != FringeKind::Oes)
    throw std::invalid_argument("gamma can only be fitted for the Oes model");
  int np = options.fit_gamma ? 3 : 2;
  int n = static_cast<int>(data.size());
  if (n < np + 1)
    throw std::invalid_argument("too few points for the fit");
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const FringePoint& pt : data) {
    if (!(pt.counts >= 0.0) || !std::isfinite(pt.counts))
      throw std::invalid_argument("counts must be finite and non-negative");
    ymin = std::min(ymin, pt.counts);
    ymax = std::max(ymax, pt.counts);
  }
  if (ymax <= 0.0) throw std::invalid_argument("all counts are zero");

  Eigen::VectorXd p(np);
  if (options.start) {
    p[0] = (*options.start)[0];
    p[1] = (*options.start)[1];
  } else {
    p[0] = ymax - ymin;
    p[1] = ymin;
  }
  if (np == 3) p[2] = model.gamma();

  auto evaluate = [&](const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                      Eigen::MatrixXd& jacobian, Eigen::VectorXd& weights) {
    double gamma = np == 3 ? params[2] : model.gamma();
    double cost = 0.0;
    for (int i = 0; i < n; ++i) {
      double phi = data[i].theta_a + data[i].theta_b;
      double f = shape(model.kind(), phi, gamma);
      double value = params[0] * f + params[1];
      double w = options.poisson_weighted ? 1.0 / std::max(value, 1.0) : 1.0;
      residuals[i] = data[i].counts - value;
      jacobian(i, 0) = f;
      jacobian(i, 1) = 1.0;
      if (np == 3) jacobian(i, 2) = params[0] * shape_dgamma(phi, gamma);
      weights[i] = w;
      cost += w * residuals[i] * residuals[i];
    }
    return cost;
  };

  Eigen::VectorXd r(n), w(n);
  Eigen::MatrixXd J(n, np);
  double cost = evaluate(p, r, J, w);
  double damping = options.damping_init;
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::MatrixXd jtj = J.transpose() * w.asDiagonal() * J;
    Eigen::VectorXd grad = J.transpose() * (w.asDiagonal() * r);
    if (grad.norm() < 1e-12) {
      converged = true;
      break;
    }
    Eigen::MatrixXd damped = jtj;
    for (int k = 0; k < np; ++k) damped(k, k) += damping * jtj(k, k);
    Eigen::VectorXd step = damped.ldlt().solve(grad);
    if (step.norm() <= 1e-12 * (p.norm() + 1.0)) {
      converged = true;
      break;
    }
    Eigen::VectorXd trial = p + step;
    Eigen::VectorXd r_trial(n), w_trial(n);
    Eigen::MatrixXd j_trial(n, np);
    double trial_cost = evaluate(trial, r_trial, j_trial, w_trial);
    if (std::isfinite(trial_cost) && trial_cost < cost) {
      double rel_change = (cost - trial_cost) / std::max(cost, 1e-300);
      p = trial;
      r = r_trial;
      J = j_trial;
      w = w_trial;
      cost = trial_cost;
      damping /= 10.0;
      if (rel_change < 1e-12) {
        converged = true;
        break;
      }
    } else {
      damping *= 10.0;
    }
  }

  FitResult result;
  result.m1 = p[0];
  result.m2 = p[1];
  result.converged = converged;
  result.iterations = iter;
  if (np == 3) result.gamma = p[2];

  Eigen::MatrixXd jtj = J.transpose() * w.asDiagonal() * J;
  double variance = cost / std::max(n - np, 1);
  Eigen::MatrixXd cov = jtj.inverse() * variance;
  result.covariance = cov.topLeftCorner(2, 2);
  if (np == 3) result.gamma_stderr = std::sqrt(std::max(cov(2, 2), 0.0));

  double denom = result.m1 + 2.0 * result.m2;
  if (denom != 0.0) {
    result.visibility = result.m1 / denom;
    Eigen::Vector2d g(2.0 * result.m2 / (denom * denom),
                      -2.0 * result.m1 / (denom * denom));
    result.visibility_stderr = std::sqrt(std::max(0.0, g.dot(result.covariance * g)));
  }
  return result;
}

double critical_visibility(const FringeModel& model) {
  BipartiteState state = model.kind() == FringeKind::Mes
                             ? maximally_entangled(4)
                             : gamma_state(model.gamma());
  double lambda_star = critical_lambda(state);
  return visibility_from_lambda(lambda_star, model.delta_p());
}

}  // namespace cglmp
