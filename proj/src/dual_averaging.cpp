#include "grhmc/dual_averaging.hpp"

#include <cmath>
#include <stdexcept>

namespace grhmc {

DualAveraging::DualAveraging(DualAveragingParams params, double target)
    : target_(target) {
  restart(params);
}

void DualAveraging::restart(DualAveragingParams params) {
  if (!(params.shrinkage > 0.0)) throw std::invalid_argument("shrinkage must be positive");
  if (!(params.offset >= 0.0)) throw std::invalid_argument("offset must be nonnegative");
  if (!(params.exponent > 0.5 && params.exponent <= 1.0))
    throw std::invalid_argument("exponent must lie in (0.5, 1]");
  params_ = params;
  k_ = 0;
  h_sum_ = 0.0;
  log_iterate_ = params.anchor;
  log_averaged_ = params.anchor;
}

double DualAveraging::update(double observation) {
  h_sum_ += target_ - observation;
  ++k_;
  const double k = static_cast<double>(k_);
  log_iterate_ = params_.anchor -
                 std::sqrt(k) / params_.shrinkage / (k + params_.offset) * h_sum_;
  const double eta = std::pow(k, -params_.exponent);
  log_averaged_ = eta * log_iterate_ + (1.0 - eta) * log_averaged_;
  return log_iterate_;
}

}  // namespace grhmc
