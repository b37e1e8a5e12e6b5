#pragma once

#include <Eigen/Dense>

namespace grhmc {

/// Standardization q = m + S * qbar with a positive diagonal S.
struct ScalingState {
  Eigen::VectorXd m;
  Eigen::VectorXd s;

  static ScalingState identity(int dim) {
    return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
  }
  int dim() const noexcept { return static_cast<int>(m.size()); }

  /// Throws std::invalid_argument unless sizes agree and every s_j is finite and > 0.
  void validate() const;

  Eigen::VectorXd to_position(const Eigen::VectorXd& qbar) const {
    return m + s.cwiseProduct(qbar);
  }
};

/**
 * Standardized position under a new scaling that leaves q unchanged:
 * qbar* = (S*)^-1 (S qbar) + (S*)^-1 (m - m*).
 */
Eigen::VectorXd reanchor(const Eigen::VectorXd& qbar, const ScalingState& from,
                         const ScalingState& to);

/// Single-coordinate form of reanchor.
inline double reanchor(double qbar, double m, double s, double m_new, double s_new) {
  return (s * qbar + (m - m_new)) / s_new;
}

}  // namespace grhmc
