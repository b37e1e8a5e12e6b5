#include "grhmc/p2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace grhmc {

P2Quantile::P2Quantile(double p) : p_(p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile must lie in (0, 1)");
  reset();
}

void P2Quantile::reset() {
  n_ = 0;
  q_.fill(0.0);
  for (int i = 0; i < 5; ++i) pos_[i] = i + 1;
  desired_ = {1.0, 1.0 + 2.0 * p_, 1.0 + 4.0 * p_, 3.0 + 2.0 * p_, 5.0};
  increment_ = {0.0, p_ / 2.0, p_, (1.0 + p_) / 2.0, 1.0};
}

void P2Quantile::insert(double x) {
  if (n_ < 5) {
    q_[n_++] = x;
    if (n_ == 5) std::sort(q_.begin(), q_.end());
    return;
  }
  ++n_;

  int cell;
  if (x < q_[0]) {
    q_[0] = x;
    cell = 0;
  } else if (x >= q_[4]) {
    q_[4] = std::max(q_[4], x);
    cell = 3;
  } else {
    cell = 0;
    while (cell < 3 && x >= q_[cell + 1]) ++cell;
  }
  for (int i = cell + 1; i < 5; ++i) ++pos_[i];
  for (int i = 0; i < 5; ++i) desired_[i] += increment_[i];

  for (int i = 1; i <= 3; ++i) {
    const double offset = desired_[i] - static_cast<double>(pos_[i]);
    if ((offset >= 1.0 && pos_[i + 1] - pos_[i] > 1) ||
        (offset <= -1.0 && pos_[i - 1] - pos_[i] < -1)) {
      const int sign = offset > 0.0 ? 1 : -1;
      const double candidate = parabolic(i, sign);
      if (q_[i - 1] < candidate && candidate < q_[i + 1])
        q_[i] = candidate;
      else
        q_[i] = linear(i, sign);
      pos_[i] += sign;
    }
  }
}

double P2Quantile::parabolic(int i, int sign) const {
  const double d = sign;
  const double n0 = static_cast<double>(pos_[i - 1]);
  const double n1 = static_cast<double>(pos_[i]);
  const double n2 = static_cast<double>(pos_[i + 1]);
  return q_[i] + d / (n2 - n0) *
                     ((n1 - n0 + d) * (q_[i + 1] - q_[i]) / (n2 - n1) +
                      (n2 - n1 - d) * (q_[i] - q_[i - 1]) / (n1 - n0));
}

double P2Quantile::linear(int i, int sign) const {
  return q_[i] + sign * (q_[i + sign] - q_[i]) /
                     static_cast<double>(pos_[i + sign] - pos_[i]);
}

double P2Quantile::estimate() const {
  if (n_ == 0) throw std::logic_error("quantile of an empty stream");
  if (n_ >= 5) return q_[2];
  std::array<double, 5> sorted = q_;
  std::sort(sorted.begin(), sorted.begin() + static_cast<long>(n_));
  // type-7 sample quantile
  const double h = (static_cast<double>(n_) - 1.0) * p_;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n_ - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace grhmc
