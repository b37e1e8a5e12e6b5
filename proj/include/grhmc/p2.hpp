#pragma once

#include <array>
#include <cstddef>

namespace grhmc {

/**
 * Streaming quantile estimate with five markers and piecewise-parabolic
 * height adjustment (Jain & Chlamtac P-square). Constant memory.
 */
class P2Quantile {
 public:
  explicit P2Quantile(double p = 0.5);

  void insert(double x);
  /// Exact sample quantile while fewer than five values have been seen.
  double estimate() const;
  std::size_t count() const noexcept { return n_; }
  double quantile() const noexcept { return p_; }
  void reset();

  const std::array<double, 5>& heights() const noexcept { return q_; }
  const std::array<long, 5>& positions() const noexcept { return pos_; }

 private:
  double parabolic(int i, int sign) const;
  double linear(int i, int sign) const;

  double p_;
  std::size_t n_ = 0;
  std::array<double, 5> q_{};
  std::array<long, 5> pos_{};
  std::array<double, 5> desired_{};
  std::array<double, 5> increment_{};
};

}  // namespace grhmc
