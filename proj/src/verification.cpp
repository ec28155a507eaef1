#include "dpbo/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpbo::verification {
namespace {

double reference_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& p) {
  const double r2 = (a - b).squaredNorm();
  const double l = p.lengthscale;
  if (p.family == KernelFamily::SquaredExponential) return std::exp(-0.5 * r2 / (l * l));
  const double r = std::sqrt(r2);
  return (1.0 + std::sqrt(5.0) * r / l + 5.0 * r2 / (3.0 * l * l)) * std::exp(-std::sqrt(5.0) * r / l);
}

Eigen::MatrixXd reference_gram(const std::vector<Eigen::VectorXd>& pts, const KernelParams& p) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(i, j) = reference_kernel(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)], p);
    }
  }
  return k;
}

}  // namespace

NaivePrediction gp_predict_naive(const HyperparamGrid& grid, const KernelParams& params,
                                 const ObservationLog& obs) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto t = static_cast<Eigen::Index>(obs.indices.size());
  NaivePrediction out{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
  if (t == 0) return out;

  std::vector<Eigen::VectorXd> train;
  for (auto idx : obs.indices) train.emplace_back(grid.points().col(static_cast<Eigen::Index>(idx)));
  Eigen::MatrixXd system = reference_gram(train, params);
  system += obs.noise_variance * Eigen::MatrixXd::Identity(t, t);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw std::invalid_argument("gp_predict_naive: singular K_T + sigma^2 I");
  const Eigen::MatrixXd inverse = lu.inverse();
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(obs.values.data(), t);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd x = grid.points().col(i);
    Eigen::RowVectorXd cross(t);
    for (Eigen::Index j = 0; j < t; ++j) cross(j) = reference_kernel(x, train[static_cast<std::size_t>(j)], params);
    out.means(i) = cross * inverse * v;
    out.variances(i) = reference_kernel(x, x, params) - (cross * inverse * cross.transpose())(0, 0);
  }
  return out;
}

double info_gain_exact(const HyperparamGrid& grid, const KernelParams& params,
                       double noise_variance, std::size_t steps) {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("info_gain_exact: sigma^2 must be > 0");
  if (grid.size() > 12 || steps > 6) {
    throw std::invalid_argument("info_gain_exact: instance too large (|grid| <= 12, T <= 6)");
  }
  if (steps < 1 || steps > grid.size()) {
    throw std::invalid_argument("info_gain_exact: need 1 <= T <= |grid|");
  }
  const std::size_t n = grid.size();
  double best = -std::numeric_limits<double>::infinity();
  // Walk every n-bit mask with exactly `steps` bits set.
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != steps) continue;
    std::vector<Eigen::VectorXd> pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) pts.emplace_back(grid.points().col(static_cast<Eigen::Index>(i)));
    }
    const auto k = static_cast<Eigen::Index>(pts.size());
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(k, k) + reference_gram(pts, params) / noise_variance;
    best = std::max(best, 0.5 * std::log(m.fullPivLu().determinant()));
  }
  return best;
}

BinSpec BinSpec::categorical(std::size_t count) { return {Kind::Categorical, count, 0.0, 0.0}; }
BinSpec BinSpec::uniform(double lower, double upper, std::size_t count) {
  return {Kind::Uniform, count, lower, upper};
}
BinSpec BinSpec::quantile(std::size_t count) { return {Kind::Quantile, count, 0.0, 0.0}; }

std::string_view to_string(BinSpec::Kind kind) {
  switch (kind) {
    case BinSpec::Kind::Categorical: return "categorical";
    case BinSpec::Kind::Uniform: return "uniform";
    case BinSpec::Kind::Quantile: return "quantile";
  }
  return "unknown";
}

DPTestReport dp_ratio_test(const Sampler& sample_v, const Sampler& sample_vprime, double epsilon,
                           double delta, std::size_t samples, const BinSpec& bins, double slack,
                           std::uint64_t seed) {
  if (samples < 10000) throw std::invalid_argument("dp_ratio_test: need at least 1e4 samples");
  if (bins.count < 1) throw std::invalid_argument("dp_ratio_test: need at least one bin");
  if (!(epsilon >= 0.0) || !(delta >= 0.0)) throw std::invalid_argument("dp_ratio_test: eps, delta must be >= 0");
  if (bins.kind == BinSpec::Kind::Uniform && !(bins.upper > bins.lower)) {
    throw std::invalid_argument("dp_ratio_test: uniform bins need upper > lower");
  }

  Rng rng_v(seed);
  Rng rng_vp(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<double> out_v(samples);
  std::vector<double> out_vp(samples);
  for (std::size_t i = 0; i < samples; ++i) out_v[i] = sample_v(rng_v);
  for (std::size_t i = 0; i < samples; ++i) out_vp[i] = sample_vprime(rng_vp);

  std::vector<double> edges;  // interior edges for the quantile bins
  if (bins.kind == BinSpec::Kind::Quantile) {
    std::vector<double> pooled(out_v);
    pooled.insert(pooled.end(), out_vp.begin(), out_vp.end());
    std::sort(pooled.begin(), pooled.end());
    for (std::size_t b = 1; b < bins.count; ++b) {
      edges.push_back(pooled[b * pooled.size() / bins.count]);
    }
  }
  const auto bin_of = [&](double x) -> std::size_t {
    switch (bins.kind) {
      case BinSpec::Kind::Categorical: {
        const auto k = static_cast<long long>(std::llround(x));
        if (k < 0 || static_cast<std::size_t>(k) >= bins.count) {
          throw std::out_of_range("dp_ratio_test: categorical output outside the bin range");
        }
        return static_cast<std::size_t>(k);
      }
      case BinSpec::Kind::Uniform: {
        const double pos = (x - bins.lower) / (bins.upper - bins.lower) * static_cast<double>(bins.count);
        if (!(pos > 0.0)) return 0;
        return std::min(bins.count - 1, static_cast<std::size_t>(pos));
      }
      case BinSpec::Kind::Quantile:
        return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
    }
    return 0;
  };

  std::vector<std::size_t> count_v(bins.count, 0);
  std::vector<std::size_t> count_vp(bins.count, 0);
  for (double x : out_v) ++count_v[bin_of(x)];
  for (double x : out_vp) ++count_vp[bin_of(x)];

  DPTestReport report;
  report.epsilon_claimed = epsilon;
  report.delta_claimed = delta;
  report.bins = bins;
  report.slack = slack;
  report.threshold = std::exp(epsilon) * (1.0 + slack);
  report.sample_count = samples;
  const double total = static_cast<double>(samples);
  const double smoothing = 1.0 / total;
  for (std::size_t b = 0; b < bins.count; ++b) {
    if (count_v[b] == 0 && count_vp[b] == 0) {
      ++report.excluded_bins;
      continue;
    }
    const double pv = static_cast<double>(count_v[b]) / total + smoothing;
    const double pvp = static_cast<double>(count_vp[b]) / total + smoothing;
    report.max_ratio_observed =
        std::max({report.max_ratio_observed, (pv - delta) / pvp, (pvp - delta) / pv});
  }
  report.pass = report.max_ratio_observed <= report.threshold;
  return report;
}

FrequencyReport utility_frequency_test(const std::function<double(std::uint64_t)>& realized_gap,
                                       double bound, double target_prob,
                                       std::size_t repetitions) {
  if (repetitions < 1000) throw std::invalid_argument("utility_frequency_test: need >= 1e3 repetitions");
  FrequencyReport report;
  report.repetitions = repetitions;
  report.target_prob = target_prob;
  for (std::uint64_t rep = 0; rep < repetitions; ++rep) {
    if (realized_gap(rep) <= bound) ++report.within_bound;
  }
  report.fraction = static_cast<double>(report.within_bound) / static_cast<double>(repetitions);
  report.pass = report.fraction >= target_prob - kBinomialSlack;
  return report;
}

}  // namespace dpbo::verification
