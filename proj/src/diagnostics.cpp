#include "grhmc/diagnostics.hpp"

#include <boost/math/distributions/normal.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace grhmc {
namespace {

// Split every chain in half; the middle draw of an odd-length chain is dropped.
Matrix split_chains(const Matrix& draws) {
  const Eigen::Index n = draws.rows();
  const Eigen::Index half = n / 2;
  Matrix out(half, 2 * draws.cols());
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    out.col(2 * c) = draws.col(c).head(half);
    out.col(2 * c + 1) = draws.col(c).tail(half);
  }
  return out;
}

Matrix rank_normalize(const Matrix& draws) {
  const Eigen::Index total = draws.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), 0);
  const double* x = draws.data();
  std::stable_sort(order.begin(), order.end(),
                   [x](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  Matrix z(draws.rows(), draws.cols());
  double* out = z.data();
  const boost::math::normal normal;
  const double denom = static_cast<double>(total) + 0.25;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    const double value = boost::math::quantile(normal, (rank - 0.375) / denom);
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = value;
    i = j + 1;
  }
  return z;
}

EssEstimate ess_of_normalized(const Matrix& sims) {
  const Eigen::Index n = sims.rows();
  const Eigen::Index chains = sims.cols();
  const double nd = static_cast<double>(n);

  Matrix acov(n, chains);
  Vector chain_mean(chains);
  for (Eigen::Index c = 0; c < chains; ++c) {
    acov.col(c) = autocovariance(sims.col(c));
    chain_mean[c] = sims.col(c).mean();
  }
  const Vector mean_acov = acov.rowwise().mean();
  const double mean_var = mean_acov[0] * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (chains > 1)
    var_plus += (chain_mean.array() - chain_mean.mean()).square().sum() /
                static_cast<double>(chains - 1);

  auto rho = [&](Eigen::Index lag) { return 1.0 - (mean_var - mean_acov[lag]) / var_plus; };
  std::vector<double> rho_hat(static_cast<std::size_t>(n), 0.0);
  Eigen::Index t = 0;
  double even = 1.0;
  double odd = rho(1);
  rho_hat[0] = even;
  rho_hat[1] = odd;
  while (t < n - 5 && std::isfinite(even + odd) && even + odd > 0.0) {
    t += 2;
    even = rho(t);
    odd = rho(t + 1);
    if (even + odd >= 0.0) {
      rho_hat[static_cast<std::size_t>(t)] = even;
      rho_hat[static_cast<std::size_t>(t + 1)] = odd;
    }
  }
  const Eigen::Index max_t = t;
  if (even > 0.0) rho_hat[static_cast<std::size_t>(max_t)] = even;

  // initial monotone sequence
  for (Eigen::Index u = 2; u <= max_t - 2; u += 2) {
    const auto k = static_cast<std::size_t>(u);
    if (rho_hat[k] + rho_hat[k + 1] > rho_hat[k - 2] + rho_hat[k - 1]) {
      rho_hat[k] = 0.5 * (rho_hat[k - 2] + rho_hat[k - 1]);
      rho_hat[k + 1] = rho_hat[k];
    }
  }

  const double total = static_cast<double>(chains) * nd;
  double sum = 0.0;
  for (Eigen::Index u = 0; u < max_t; ++u) sum += rho_hat[static_cast<std::size_t>(u)];
  double tau = -1.0 + 2.0 * sum + rho_hat[static_cast<std::size_t>(max_t)];
  tau = std::max(tau, 1.0 / std::log10(total));
  return {total / tau, false};
}

}  // namespace

Vector autocovariance(const Vector& x) {
  const Eigen::Index n = x.size();
  Eigen::Index m = 1;
  while (m < 2 * n) m *= 2;
  std::vector<double> padded(static_cast<std::size_t>(m), 0.0);
  const double mean = x.mean();
  for (Eigen::Index i = 0; i < n; ++i) padded[static_cast<std::size_t>(i)] = x[i] - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  for (auto& c : spectrum) c = std::norm(c);
  std::vector<double> ac;
  fft.inv(ac, spectrum);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = ac[static_cast<std::size_t>(i)] / static_cast<double>(n);
  return out;
}

EssEstimate bulk_ess(const Matrix& draws) {
  if (draws.rows() < 6) throw std::invalid_argument("ESS needs at least 6 draws per chain");
  if (draws.cols() < 1) throw std::invalid_argument("ESS needs at least one chain");
  if (!draws.allFinite()) return {0.0, true};
  if (draws.maxCoeff() == draws.minCoeff()) return {0.0, true};
  return ess_of_normalized(rank_normalize(split_chains(draws)));
}

std::vector<EssEstimate> ess(const std::vector<Matrix>& chains) {
  if (chains.empty()) throw std::invalid_argument("ESS needs at least one chain");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index d = chains.front().cols();
  for (const Matrix& c : chains)
    if (c.rows() != n || c.cols() != d)
      throw std::invalid_argument("ESS: chains must have equal shape");
  std::vector<EssEstimate> out;
  Matrix draws(n, static_cast<Eigen::Index>(chains.size()));
  for (Eigen::Index j = 0; j < d; ++j) {
    for (std::size_t c = 0; c < chains.size(); ++c)
      draws.col(static_cast<Eigen::Index>(c)) = chains[c].col(j);
    out.push_back(bulk_ess(draws));
  }
  return out;
}

double efficiency(double ess_value, std::uint64_t n_ode_total) {
  if (n_ode_total == 0) throw std::invalid_argument("N_ode must be positive");
  return ess_value * 100000.0 / static_cast<double>(n_ode_total);
}

std::vector<CoordinateRow> EssReport::table_rows(int max_listed) const {
  if (static_cast<int>(coordinates.size()) <= max_listed) return coordinates;
  auto by_ess = [](const CoordinateRow& a, const CoordinateRow& b) {
    return a.ess.value < b.ess.value;
  };
  CoordinateRow hi = *std::max_element(coordinates.begin(), coordinates.end(), by_ess);
  CoordinateRow lo = *std::min_element(coordinates.begin(), coordinates.end(), by_ess);
  hi.label = "max ESS";
  lo.label = "min ESS";
  return {hi, lo};
}

EssReport summarize(const std::vector<ReplicaSummary>& replicas) {
  if (replicas.empty()) throw std::invalid_argument("summarize needs at least one replica");
  const Eigen::Index d = replicas.front().samples.cols();
  std::vector<Matrix> chains;
  EssReport report;
  for (const auto& r : replicas) {
    chains.push_back(r.samples);
    report.n_ode_total += r.n_ode;
    report.total_samples += static_cast<long>(r.samples.rows());
  }
  const std::vector<EssEstimate> values = ess(chains);
  const auto reps = static_cast<double>(replicas.size());
  for (Eigen::Index j = 0; j < d; ++j) {
    CoordinateRow row;
    row.coordinate = static_cast<int>(j);
    row.label = std::to_string(j + 1);
    row.ess = values[static_cast<std::size_t>(j)];

    double sum = 0.0, sum_sq = 0.0;
    for (const auto& r : replicas) {
      sum += r.samples.col(j).sum();
      sum_sq += r.samples.col(j).squaredNorm();
    }
    const double n = static_cast<double>(report.total_samples);
    row.mean = sum / n;
    row.sd = std::sqrt(std::max(0.0, (sum_sq - n * row.mean * row.mean) / (n - 1.0)));
    row.mean_se = row.ess.value > 0.0 ? row.sd / std::sqrt(row.ess.value)
                                      : std::numeric_limits<double>::infinity();

    // shifted by the first value so identical scales give exactly zero spread
    const double shift = replicas.front().scale[j];
    double s_sum = 0.0, s_sq = 0.0;
    for (const auto& r : replicas) {
      const double x = r.scale[j] - shift;
      s_sum += x;
      s_sq += x * x;
    }
    row.scale_mean = shift + s_sum / reps;
    const double s_var = std::max(0.0, (s_sq - s_sum * s_sum / reps) / (reps - 1.0));
    row.scale_sd = replicas.size() > 1 ? std::sqrt(s_var) : 0.0;
    row.efficiency = report.n_ode_total > 0 ? efficiency(row.ess.value, report.n_ode_total) : 0.0;
    report.coordinates.push_back(std::move(row));
  }
  return report;
}

}  // namespace grhmc
