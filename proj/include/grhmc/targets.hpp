#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grhmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a target, dataset or configuration cannot be constructed.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Analytic moments of a target, used by tests and reports.
struct ReferenceMoments {
  Vector mean;
  Vector sd;
  std::optional<Vector> median;
};

/**
 * An unnormalized log density kernel together with its gradient.
 *
 * The evaluator writes the gradient into `grad` (length dim) and returns
 * log pi~(q). Evaluators hold only immutable captured data, so a model can be
 * shared between replicas running on different threads.
 */
class TargetModel {
 public:
  using Evaluator =
      std::function<double(const Vector& q, Eigen::Ref<Vector> grad)>;

  TargetModel(std::string name, int dim, Evaluator eval,
              std::optional<ReferenceMoments> reference = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  const std::optional<ReferenceMoments>& reference() const noexcept {
    return reference_;
  }

  double log_density(const Vector& q, Eigen::Ref<Vector> grad) const {
    return eval_(q, grad);
  }

  /// Allocating convenience form, returns (log pi~(q), grad log pi~(q)).
  std::pair<double, Vector> eval(const Vector& q) const;

 private:
  std::string name_;
  int dim_;
  Evaluator eval_;
  std::optional<ReferenceMoments> reference_;
};

struct GaussianSpec {
  Vector mu;
  Matrix sigma;
};

struct LogisticRegressionData {
  Matrix x;  // n x d, first column is the intercept
  Vector y;  // entries in {0, 1}
  double prior_variance = 100.0;
  std::vector<std::string> column_names;
};

TargetModel make_gaussian(const GaussianSpec& spec);
TargetModel make_standard_normal(int dim);

/// Multivariate t with `nu` degrees of freedom and scale matrix `sigma`.
TargetModel make_student_t(const Vector& mu, const Matrix& sigma, double nu);

/// q1 ~ N(0,1), q2 | q1 ~ N(q1^2, 1).
TargetModel make_smiley();

/// log pi~(q) = -(1 - q1^2)^2 - (q2 - q1)^2 / 2.
TargetModel make_bimodal();

/// q1 ~ N(0,1), q2 | q1 ~ N(0, exp(omega q1)).
TargetModel make_funnel(double omega);

/// Bernoulli-logit likelihood with an iid N(0, prior_variance) prior.
TargetModel make_logistic(LogisticRegressionData data);

/// Central finite-difference gradient with step 1e-6 * max(1, |q_j|).
Vector finite_difference_gradient(const TargetModel& target, const Vector& q);

}  // namespace grhmc
