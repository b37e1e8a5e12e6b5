#include "grhmc/targets.hpp"

#include <cmath>
#include <memory>
#include <utility>

namespace grhmc {

TargetModel::TargetModel(std::string name, int dim, Evaluator eval,
                         std::optional<ReferenceMoments> reference)
    : name_(std::move(name)),
      dim_(dim),
      eval_(std::move(eval)),
      reference_(std::move(reference)) {
  if (dim_ <= 0) throw ModelError("target dimension must be positive");
  if (!eval_) throw ModelError("target evaluator is empty");
}

std::pair<double, Vector> TargetModel::eval(const Vector& q) const {
  if (q.size() != dim_) throw ModelError("position has wrong dimension");
  Vector grad(dim_);
  const double lp = eval_(q, grad);
  return {lp, std::move(grad)};
}

namespace {

struct Precision {
  Matrix precision;
};

Matrix checked_inverse(const Matrix& sigma, const char* what) {
  if (sigma.rows() != sigma.cols())
    throw ModelError(std::string(what) + ": covariance must be square");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw ModelError(std::string(what) + ": covariance must be symmetric");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw ModelError(std::string(what) +
                     ": covariance is not positive definite");
  return llt.solve(Matrix::Identity(sigma.rows(), sigma.cols()));
}

}  // namespace

TargetModel make_gaussian(const GaussianSpec& spec) {
  const auto d = spec.mu.size();
  if (d == 0 || spec.sigma.rows() != d)
    throw ModelError("gaussian: mean and covariance sizes differ");
  auto data = std::make_shared<const Precision>(
      Precision{checked_inverse(spec.sigma, "gaussian")});
  Vector mu = spec.mu;
  ReferenceMoments ref{mu, spec.sigma.diagonal().cwiseSqrt(), mu};
  return TargetModel(
      "gaussian", static_cast<int>(d),
      [data, mu](const Vector& q, Eigen::Ref<Vector> grad) {
        const Vector diff = q - mu;
        grad.noalias() = -(data->precision * diff);
        return 0.5 * diff.dot(grad);
      },
      std::move(ref));
}

TargetModel make_standard_normal(int dim) {
  if (dim <= 0) throw ModelError("standard normal: dimension must be positive");
  ReferenceMoments ref{Vector::Zero(dim), Vector::Ones(dim), Vector::Zero(dim)};
  return TargetModel(
      "standard_normal", dim,
      [](const Vector& q, Eigen::Ref<Vector> grad) {
        grad = -q;
        return -0.5 * q.squaredNorm();
      },
      std::move(ref));
}

TargetModel make_student_t(const Vector& mu, const Matrix& sigma, double nu) {
  if (!(nu > 0.0)) throw ModelError("student t: nu must be positive");
  const auto d = mu.size();
  if (d == 0 || sigma.rows() != d)
    throw ModelError("student t: location and scale sizes differ");
  auto data = std::make_shared<const Precision>(
      Precision{checked_inverse(sigma, "student t")});
  const double power = 0.5 * (nu + static_cast<double>(d));

  std::optional<ReferenceMoments> ref;
  if (nu > 2.0) {
    ref = ReferenceMoments{
        mu, (sigma.diagonal() * (nu / (nu - 2.0))).cwiseSqrt(), mu};
  }
  return TargetModel(
      "student_t", static_cast<int>(d),
      [data, mu, nu, power](const Vector& q, Eigen::Ref<Vector> grad) {
        const Vector diff = q - mu;
        const Vector pd = data->precision * diff;
        const double quad = diff.dot(pd);
        grad.noalias() = -(2.0 * power / (nu + quad)) * pd;
        return -power * std::log1p(quad / nu);
      },
      std::move(ref));
}

TargetModel make_smiley() {
  // q2 = q1^2 + eps, so E q2 = 1 and Var q2 = Var(q1^2) + 1 = 3.
  ReferenceMoments ref{Vector::Zero(2), Vector::Zero(2), std::nullopt};
  ref.mean << 0.0, 1.0;
  ref.sd << 1.0, std::sqrt(3.0);
  return TargetModel(
      "smiley", 2,
      [](const Vector& q, Eigen::Ref<Vector> grad) {
        const double r = q[1] - q[0] * q[0];
        grad[0] = -q[0] + 2.0 * q[0] * r;
        grad[1] = -r;
        return -0.5 * q[0] * q[0] - 0.5 * r * r;
      },
      std::move(ref));
}

namespace {

// E[q1^2] under the q1 marginal exp(-(1 - x^2)^2), by composite Simpson.
double bimodal_second_moment() {
  constexpr int n = 20000;
  constexpr double lo = -6.0, hi = 6.0;
  const double h = (hi - lo) / n;
  double z = 0.0, m2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double f = std::exp(-(1.0 - x * x) * (1.0 - x * x));
    z += w * f;
    m2 += w * f * x * x;
  }
  return m2 / z;
}

}  // namespace

TargetModel make_bimodal() {
  const double m2 = bimodal_second_moment();
  ReferenceMoments ref{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  ref.sd << std::sqrt(m2), std::sqrt(m2 + 1.0);
  return TargetModel(
      "bimodal", 2,
      [](const Vector& q, Eigen::Ref<Vector> grad) {
        const double a = 1.0 - q[0] * q[0];
        const double r = q[1] - q[0];
        grad[0] = 4.0 * q[0] * a + r;
        grad[1] = -r;
        return -a * a - 0.5 * r * r;
      },
      std::move(ref));
}

TargetModel make_funnel(double omega) {
  ReferenceMoments ref{Vector::Zero(2), Vector::Zero(2), Vector::Zero(2)};
  ref.sd << 1.0, std::exp(0.25 * omega * omega);
  return TargetModel(
      "funnel", 2,
      [omega](const Vector& q, Eigen::Ref<Vector> grad) {
        const double e = std::exp(-omega * q[0]);
        grad[0] = -q[0] - 0.5 * omega + 0.5 * omega * q[1] * q[1] * e;
        grad[1] = -q[1] * e;
        return -0.5 * q[0] * q[0] - 0.5 * omega * q[0] -
               0.5 * q[1] * q[1] * e;
      },
      std::move(ref));
}

TargetModel make_logistic(LogisticRegressionData data) {
  if (data.x.rows() == 0 || data.x.cols() == 0)
    throw ModelError("logistic: empty design matrix");
  if (data.x.rows() != data.y.size())
    throw ModelError("logistic: design matrix and response lengths differ");
  if (!(data.prior_variance > 0.0))
    throw ModelError("logistic: prior variance must be positive");
  for (Eigen::Index i = 0; i < data.y.size(); ++i) {
    if (data.y[i] != 0.0 && data.y[i] != 1.0)
      throw ModelError("logistic: response must be 0 or 1");
  }
  const int d = static_cast<int>(data.x.cols());
  auto shared = std::make_shared<const LogisticRegressionData>(std::move(data));
  return TargetModel("logistic", d,
                     [shared, d](const Vector& beta, Eigen::Ref<Vector> grad) {
                       if (beta.size() != d)
                         throw ModelError("logistic: coefficient length differs");
                       const Vector eta = shared->x * beta;
                       double lp = 0.0;
                       Vector resid(eta.size());
                       for (Eigen::Index i = 0; i < eta.size(); ++i) {
                         const double e = eta[i];
                         // log(1 + exp(e)) and the logistic function without overflow
                         const double t = std::exp(-std::abs(e));
                         lp += shared->y[i] * e - (std::max(e, 0.0) + std::log1p(t));
                         const double sigmoid = e >= 0.0 ? 1.0 / (1.0 + t) : t / (1.0 + t);
                         resid[i] = shared->y[i] - sigmoid;
                       }
                       const double inv_var = 1.0 / shared->prior_variance;
                       grad.noalias() = shared->x.transpose() * resid;
                       grad -= inv_var * beta;
                       return lp - 0.5 * inv_var * beta.squaredNorm();
                     });
}

Vector finite_difference_gradient(const TargetModel& target, const Vector& q) {
  Vector grad(target.dim());
  Vector scratch(target.dim());
  Vector x = q;
  for (int j = 0; j < target.dim(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(q[j]));
    x[j] = q[j] + h;
    const double up = target.log_density(x, scratch);
    x[j] = q[j] - h;
    const double down = target.log_density(x, scratch);
    x[j] = q[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace grhmc
