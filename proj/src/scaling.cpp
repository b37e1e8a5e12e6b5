#include "grhmc/scaling.hpp"

#include <cmath>
#include <stdexcept>

namespace grhmc {

void ScalingState::validate() const {
  if (m.size() != s.size())
    throw std::invalid_argument("scaling: m and S sizes differ");
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (!(s[j] > 0.0) || !std::isfinite(s[j]))
      throw std::invalid_argument("scaling: S must be finite and positive");
    if (!std::isfinite(m[j]))
      throw std::invalid_argument("scaling: m must be finite");
  }
}

Eigen::VectorXd reanchor(const Eigen::VectorXd& qbar, const ScalingState& from,
                         const ScalingState& to) {
  to.validate();
  if (from.s.size() != qbar.size() || to.s.size() != qbar.size())
    throw std::invalid_argument("reanchor: dimension mismatch");
  const Eigen::ArrayXd inv = to.s.array().inverse();
  return (inv * (from.s.array() * qbar.array()) + inv * (from.m - to.m).array())
      .matrix();
}

}  // namespace grhmc
