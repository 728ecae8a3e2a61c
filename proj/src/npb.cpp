#include "premix/npb.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "premix/errors.hpp"
#include "premix/numerics.hpp"
#include "premix/parallel.hpp"

namespace premix {

namespace {

double scaled_dot(const LikCurve& curve, std::span<const double> values,
                  std::span<const double> weights) {
  double dot = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j)
    dot += curve.scaled[j] * values[j] * weights[j];
  return dot;
}

struct PassOutput {
  std::vector<int> assignments;
  std::vector<int> sizes;
  std::vector<std::vector<double>> clusters;
  std::vector<double> mean_values;
  double log_weight = 0.0;
};

// One full sequential pass on raw value vectors.
//   step 1:  open cluster 1 with the first observation, weight = its marginal;
//   step t:  q_0 = c * integral p(x_t|.) f0, q_ell = n_ell * integral p(x_t|.) f^(ell),
//            weight *= sum_ell q_ell / (c + t - 1), label drawn with P ~ q_ell,
//            then either open a cluster or Bayes-update the chosen one.
PassOutput run_pass(const LikTable& table, std::span<const std::size_t> order,
                    const DPConfig& dp, RandomStream& rng) {
  const DominatingMeasure& mu = table.measure();
  const std::span<const double> weights = mu.support_weights();
  const std::size_t m = mu.support_size();
  const std::size_t n = order.size();
  const std::span<const double> f0 = dp.f0.values();

  PassOutput out;
  out.assignments.reserve(n);

  auto posterior = [&](std::vector<double> f, const LikCurve& curve, std::size_t step) {
    double dot = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      f[j] *= curve.scaled[j];
      dot += f[j] * weights[j];
    }
    if (!(dot > 0.0) || !std::isfinite(dot))
      throw DegenerateDensityError(
          "sis_pass: cluster update lost all mass at step " + std::to_string(step), step);
    for (double& v : f) v /= dot;
    return f;
  };

  {
    const LikCurve& curve = table.curve(order[0]);
    const double dot = scaled_dot(curve, f0, weights);
    if (!(dot > 0.0))
      throw DegenerateDensityError("sis_pass: first observation has zero marginal", 1);
    out.log_weight = curve.log_scale + std::log(dot);
    out.clusters.push_back(posterior(std::vector<double>(f0.begin(), f0.end()), curve, 1));
    out.sizes.push_back(1);
    out.assignments.push_back(1);
  }

  std::vector<double> q;
  for (std::size_t t = 2; t <= n; ++t) {
    const LikCurve& curve = table.curve(order[t - 1]);
    const std::size_t M = out.clusters.size();
    q.assign(M + 1, 0.0);
    q[0] = dp.c * scaled_dot(curve, f0, weights);
    for (std::size_t ell = 0; ell < M; ++ell)
      q[ell + 1] = out.sizes[ell] * scaled_dot(curve, out.clusters[ell], weights);
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total))
      throw DegenerateDensityError(
          "sis_pass: observation has zero predictive density at step " + std::to_string(t), t);
    out.log_weight += curve.log_scale + std::log(total) -
                      std::log(dp.c + static_cast<double>(t) - 1.0);

    double u = rng.uniform01() * total;
    std::size_t pick = 0;
    for (; pick <= M; ++pick) {
      u -= q[pick];
      if (u < 0.0) break;
    }
    if (pick > M) pick = M;  // guard against roundoff at the right edge
    if (pick == 0) {
      out.clusters.push_back(posterior(std::vector<double>(f0.begin(), f0.end()), curve, t));
      out.sizes.push_back(1);
      out.assignments.push_back(static_cast<int>(out.clusters.size()));
    } else {
      out.clusters[pick - 1] = posterior(std::move(out.clusters[pick - 1]), curve, t);
      ++out.sizes[pick - 1];
      out.assignments.push_back(static_cast<int>(pick));
    }
  }

  out.mean_values.assign(m, 0.0);
  const double denom = dp.c + static_cast<double>(n);
  for (std::size_t j = 0; j < m; ++j) out.mean_values[j] = dp.c * f0[j];
  for (std::size_t ell = 0; ell < out.clusters.size(); ++ell)
    for (std::size_t j = 0; j < m; ++j)
      out.mean_values[j] += out.sizes[ell] * out.clusters[ell][j];
  for (double& v : out.mean_values) v /= denom;
  return out;
}

void check_dp(const DPConfig& dp, const LikTable& table) {
  if (!(dp.c > 0.0)) throw std::invalid_argument("npb: precision c must be positive");
  if (!dp.f0.measure().same_support(table.measure()))
    throw std::invalid_argument("npb: base density lives on a different measure");
}

}  // namespace

SisResult sis_pass(const LikTable& table, std::span<const std::size_t> order,
                   const DPConfig& dp, RandomStream& rng) {
  if (order.empty()) throw std::invalid_argument("sis_pass: empty data");
  check_dp(dp, table);
  PassOutput out = run_pass(table, order, dp, rng);

  ClusterState state;
  state.assignments = std::move(out.assignments);
  state.cluster_sizes = std::move(out.sizes);
  state.log_weight = out.log_weight;
  state.cluster_densities.reserve(out.clusters.size());
  for (auto& c : out.clusters)
    state.cluster_densities.emplace_back(table.measure_ptr(), std::move(c));

  Density mean_density(table.measure_ptr(), std::move(out.mean_values));
  return SisResult{std::move(state), std::move(mean_density)};
}

SisResult sis_pass(std::span<const Observation> data, const DPConfig& dp,
                   const SamplingModel& model, RandomStream& rng) {
  const LikTable table(model, data, dp.f0.measure_ptr());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return sis_pass(table, order, dp, rng);
}

NpbEstimate npb_estimate(const LikTable& table, const DPConfig& dp, std::size_t R,
                         std::uint64_t seed, const NpbOptions& options) {
  if (R == 0) throw std::invalid_argument("npb_estimate: need at least one pass");
  if (table.size() == 0) throw std::invalid_argument("npb_estimate: empty data");
  check_dp(dp, table);
  const std::size_t n = table.size();
  const std::size_t m = table.measure().support_size();

  NpbEstimate est;
  est.num_samples = R;
  if (options.collect_diagnostics) est.diagnostics.reserve(R);

  // Streaming weighted reduction in pass-index order: density accumulator
  // plus log-sum-exp of weights and squared weights (for the ESS).
  std::vector<double> acc(m, 0.0);
  double max_log = kNegInf;
  double sum_scaled = 0.0;
  StreamingLogSum lse_w, lse_w2;

  constexpr std::size_t kChunk = 128;
  std::vector<PassOutput> slot(std::min(kChunk, R));
  for (std::size_t base = 0; base < R; base += kChunk) {
    const std::size_t count = std::min(kChunk, R - base);
    parallel_for(count, options.workers, [&](std::size_t k) {
      RandomStream rng = RandomStream::derive(seed, base + k);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      if (options.permute_each_pass) rng.shuffle(order);
      slot[k] = run_pass(table, order, dp, rng);
    });
    for (std::size_t k = 0; k < count; ++k) {
      const PassOutput& p = slot[k];
      if (options.collect_diagnostics)
        est.diagnostics.push_back({p.log_weight, static_cast<int>(p.sizes.size())});
      lse_w.add(p.log_weight);
      lse_w2.add(2.0 * p.log_weight);
      if (p.log_weight == kNegInf) continue;
      if (p.log_weight > max_log) {
        const double rescale = std::exp(max_log - p.log_weight);
        sum_scaled *= rescale;
        for (double& v : acc) v *= rescale;
        max_log = p.log_weight;
      }
      const double w = std::exp(p.log_weight - max_log);
      sum_scaled += w;
      for (std::size_t j = 0; j < m; ++j) acc[j] += w * p.mean_values[j];
    }
  }

  if (!(sum_scaled > 0.0))
    throw DegenerateDensityError("npb_estimate: all importance weights are zero");
  for (double& v : acc) v /= sum_scaled;

  est.density = Density(table.measure_ptr(), std::move(acc));
  est.ess = std::exp(2.0 * lse_w.value() - lse_w2.value());
  est.log_marginal = lse_w.value() - std::log(static_cast<double>(R));
  return est;
}

NpbEstimate npb_estimate(std::span<const Observation> data, const DPConfig& dp,
                         const SamplingModel& model, std::size_t R, std::uint64_t seed,
                         const NpbOptions& options) {
  const LikTable table(model, data, dp.f0.measure_ptr());
  return npb_estimate(table, dp, R, seed, options);
}

double ess(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("ess: empty weight list");
  double sum = 0.0, sum_sq = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("ess: weights must be finite and nonnegative");
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("ess: all weights are zero");
  return sum * sum / sum_sq;
}

double ess_from_log(std::span<const double> log_weights) {
  if (log_weights.empty()) throw std::invalid_argument("ess: empty weight list");
  const double l1 = log_sum_exp(log_weights);
  if (l1 == kNegInf) throw std::invalid_argument("ess: all weights are zero");
  std::vector<double> doubled(log_weights.begin(), log_weights.end());
  for (double& v : doubled) v *= 2.0;
  return std::exp(2.0 * l1 - log_sum_exp(doubled));
}

namespace detail {

namespace {
void partition_rec(std::vector<int>& labels, std::size_t i, int max_label,
                   const std::function<void(std::span<const int>)>& fn) {
  if (i == labels.size()) {
    fn(labels);
    return;
  }
  for (int lab = 0; lab <= max_label + 1; ++lab) {
    labels[i] = lab;
    partition_rec(labels, i + 1, std::max(max_label, lab), fn);
  }
}
}  // namespace

void for_each_set_partition(std::size_t n, const std::function<void(std::span<const int>)>& fn) {
  if (n == 0) return;
  std::vector<int> labels(n, 0);
  partition_rec(labels, 1, 0, fn);
}

}  // namespace detail

ExactNpb enumerate_exact(std::span<const Observation> data, const DPConfig& dp,
                         const SamplingModel& model) {
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("enumerate_exact: empty data");
  if (n > 8)
    throw std::invalid_argument("enumerate_exact: partition enumeration guarded to n <= 8");
  if (!(dp.c > 0.0)) throw std::invalid_argument("enumerate_exact: precision must be positive");

  const MeasurePtr& measure = dp.f0.measure_ptr();
  const LikTable table(model, data, measure);
  const DominatingMeasure& mu = *measure;
  const std::span<const double> weights = mu.support_weights();
  const std::size_t m = mu.support_size();
  const std::span<const double> f0 = dp.f0.values();

  // log prod_{i=1..n} (c + i - 1), the Ewens partition normalizer.
  double log_ewens_denom = 0.0;
  for (std::size_t i = 1; i <= n; ++i)
    log_ewens_denom += std::log(dp.c + static_cast<double>(i) - 1.0);

  std::vector<double> acc(m, 0.0);
  double max_log = kNegInf;
  double sum_scaled = 0.0;
  StreamingLogSum lse;

  std::vector<std::vector<std::size_t>> members;
  detail::for_each_set_partition(n, [&](std::span<const int> labels) {
    int M = 0;
    for (int lab : labels) M = std::max(M, lab + 1);
    members.assign(M, {});
    for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);

    // Cluster marginal likelihoods: product of member curves against f0,
    // kept as scaled values with an accumulated log scale.
    double log_lik = 0.0;
    std::vector<std::vector<double>> cluster_posteriors(M);
    bool dead = false;
    for (int ell = 0; ell < M; ++ell) {
      std::vector<double> vals(f0.begin(), f0.end());
      double log_scale = 0.0;
      for (std::size_t i : members[ell]) {
        const LikCurve& curve = table.curve(i);
        log_scale += curve.log_scale;
        for (std::size_t j = 0; j < m; ++j) vals[j] *= curve.scaled[j];
      }
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += vals[j] * weights[j];
      if (!(dot > 0.0)) {
        dead = true;
        break;
      }
      log_lik += log_scale + std::log(dot);
      for (double& v : vals) v /= dot;
      cluster_posteriors[ell] = std::move(vals);
    }
    if (dead) return;  // zero-likelihood partition

    double log_prior = M * std::log(dp.c) - log_ewens_denom;
    for (int ell = 0; ell < M; ++ell)
      log_prior += std::lgamma(static_cast<double>(members[ell].size()));

    const double log_w = log_prior + log_lik;
    lse.add(log_w);

    std::vector<double> mean(m);
    const double denom = dp.c + static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) mean[j] = dp.c * f0[j];
    for (int ell = 0; ell < M; ++ell)
      for (std::size_t j = 0; j < m; ++j)
        mean[j] += members[ell].size() * cluster_posteriors[ell][j];
    for (double& v : mean) v /= denom;

    if (log_w > max_log) {
      const double rescale = std::exp(max_log - log_w);
      sum_scaled *= rescale;
      for (double& v : acc) v *= rescale;
      max_log = log_w;
    }
    const double w = std::exp(log_w - max_log);
    sum_scaled += w;
    for (std::size_t j = 0; j < m; ++j) acc[j] += w * mean[j];
  });

  if (!(sum_scaled > 0.0))
    throw DegenerateDensityError("enumerate_exact: data has zero marginal likelihood");
  for (double& v : acc) v /= sum_scaled;
  return ExactNpb{Density(measure, std::move(acc)), lse.value()};
}

}  // namespace premix
