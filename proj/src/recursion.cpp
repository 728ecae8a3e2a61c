#include "premix/recursion.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "premix/errors.hpp"
#include "premix/numerics.hpp"
#include "premix/parallel.hpp"

namespace premix {

WeightSchedule::WeightSchedule(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.5 && alpha <= 1.0))
    throw std::invalid_argument("weight schedule: alpha must lie in (0.5, 1]");
}

double WeightSchedule::weight(std::size_t i) const {
  if (i == 0) throw std::invalid_argument("weight schedule: steps are 1-based");
  return 1.0 / (std::pow(static_cast<double>(i), alpha_) + 1.0);
}

namespace {

// In-place recursive update against a scaled likelihood curve.  Returns the
// marginal p_f(x); throws when it vanishes.  The blended output integrates to
// 1 by construction (both terms are normalized against the same dot product).
double fold_step(std::vector<double>& f, const LikCurve& curve,
                 std::span<const double> weights, double w, std::size_t step_index) {
  const std::size_t n = f.size();
  double dot = 0.0;
  for (std::size_t j = 0; j < n; ++j) dot += curve.scaled[j] * f[j] * weights[j];
  if (!(dot > 0.0) || !std::isfinite(dot))
    throw DegenerateDensityError(
        "recursive update: observation has zero marginal density at step " +
            std::to_string(step_index),
        step_index);
  const double gain = w / dot;
  const double keep = 1.0 - w;
  for (std::size_t j = 0; j < n; ++j) f[j] = keep * f[j] + gain * curve.scaled[j] * f[j];
  return dot * std::exp(curve.log_scale);
}

double kl_theta(const Density& truth, std::span<const double> est,
                std::span<const double> weights) {
  double kl = 0.0;
  const std::span<const double> t = truth.values();
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (t[j] <= 0.0) continue;
    if (est[j] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += weights[j] * t[j] * std::log(t[j] / est[j]);
  }
  return kl > 0.0 ? kl : 0.0;
}

ReRunResult fold_run(const Density& f0, const LikTable& table,
                     std::span<const std::size_t> order, const WeightSchedule& schedule,
                     const ReRunOptions& options) {
  const MeasurePtr& measure = table.measure_ptr();
  if (!f0.measure().same_support(*measure))
    throw std::invalid_argument("re_run: initial estimate lives on a different measure");
  const std::size_t n = order.size();
  if (n == 0) throw std::invalid_argument("re_run: empty data");

  std::vector<std::size_t> checkpoints = options.checkpoints;
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (!checkpoints.empty() && checkpoints.back() > n)
    throw std::invalid_argument("re_run: checkpoint beyond the data length");

  RecursionTrace trace;
  trace.steps.reserve(n);
  const std::span<const double> weights = measure->support_weights();
  std::vector<double> f(f0.values().begin(), f0.values().end());

  auto snapshot = [&](std::size_t i) {
    Density d(measure, std::vector<double>(f));
    if (options.truth) trace.checkpoint_kl_theta.push_back(kl_theta(*options.truth, f, weights));
    trace.checkpoint_steps.push_back(i);
    trace.checkpoint_densities.push_back(std::move(d));
  };

  std::size_t next_cp = 0;
  if (next_cp < checkpoints.size() && checkpoints[next_cp] == 0) {
    snapshot(0);
    ++next_cp;
  }

  for (std::size_t i = 1; i <= n; ++i) {
    const double w = schedule.weight(i);
    const double marginal = fold_step(f, table.curve(order[i - 1]), weights, w, i);
    trace.steps.push_back({i, w, marginal});
    assert(std::abs(integrate_values(*measure, f) - 1.0) <= 1e-9);
    if (options.retain_iterates) trace.iterates.emplace_back(measure, std::vector<double>(f));
    if (next_cp < checkpoints.size() && checkpoints[next_cp] == i) {
      snapshot(i);
      ++next_cp;
    }
  }

  Density final(measure, std::move(f));
  return ReRunResult{std::move(final), std::move(trace)};
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

}  // namespace

Density re_update(const Density& f_prev, const Observation& x, double w,
                  const SamplingModel& model) {
  if (!(w > 0.0 && w <= 1.0))
    throw std::invalid_argument("re_update: weight must lie in (0, 1]");
  const LikCurve curve = make_lik_curve(model, x, f_prev.measure());
  std::vector<double> f(f_prev.values().begin(), f_prev.values().end());
  fold_step(f, curve, f_prev.measure().support_weights(), w, 1);
  return Density(f_prev.measure_ptr(), std::move(f));
}

ReRunResult re_run(const Density& f0, std::span<const Observation> data,
                   const WeightSchedule& schedule, const SamplingModel& model,
                   const ReRunOptions& options) {
  const LikTable table(model, data, f0.measure_ptr());
  return fold_run(f0, table, identity_order(data.size()), schedule, options);
}

ReRunResult re_run(const Density& f0, const LikTable& table, const WeightSchedule& schedule,
                   const ReRunOptions& options) {
  return fold_run(f0, table, identity_order(table.size()), schedule, options);
}

std::vector<std::size_t> permutation_for(std::uint64_t seed, std::size_t perm_index,
                                         std::size_t n) {
  RandomStream stream = RandomStream::derive(seed, perm_index);
  std::vector<std::size_t> order = identity_order(n);
  stream.shuffle(order);
  return order;
}

Density pare_run(const Density& f0, const LikTable& table, const WeightSchedule& schedule,
                 std::size_t num_perms, std::uint64_t seed, unsigned workers) {
  if (num_perms == 0) throw std::invalid_argument("pare_run: need at least one permutation");
  const std::size_t n = table.size();
  const std::size_t m = f0.size();
  std::vector<double> acc(m, 0.0);

  constexpr std::size_t kChunk = 256;
  std::vector<std::vector<double>> slot(std::min(kChunk, num_perms));
  for (std::size_t base = 0; base < num_perms; base += kChunk) {
    const std::size_t count = std::min(kChunk, num_perms - base);
    parallel_for(count, workers, [&](std::size_t k) {
      const std::vector<std::size_t> order = permutation_for(seed, base + k, n);
      ReRunResult r = fold_run(f0, table, order, schedule, {});
      slot[k].assign(r.final.values().begin(), r.final.values().end());
    });
    // Reduce in permutation-index order so results do not depend on scheduling.
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t j = 0; j < m; ++j) acc[j] += slot[k][j];
  }
  const double inv = 1.0 / static_cast<double>(num_perms);
  for (double& v : acc) v *= inv;
  return Density(f0.measure_ptr(), std::move(acc));
}

Density pare_run(const Density& f0, std::span<const Observation> data,
                 const WeightSchedule& schedule, const SamplingModel& model,
                 std::size_t num_perms, std::uint64_t seed, unsigned workers) {
  const LikTable table(model, data, f0.measure_ptr());
  return pare_run(f0, table, schedule, num_perms, seed, workers);
}

Density pare_exact(const Density& f0, const LikTable& table, const WeightSchedule& schedule) {
  const std::size_t n = table.size();
  if (n == 0) throw std::invalid_argument("pare_exact: empty data");
  if (n > 8) throw std::invalid_argument("pare_exact: factorial enumeration guarded to n <= 8");

  // Enumerate distinct value arrangements from the sorted start.  Duplicated
  // values collapse permutations that produce identical runs, and every
  // distinct arrangement corresponds to the same number of raw permutations,
  // so the uniform average is unchanged.
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = table.observation(i).value;
  std::sort(values.begin(), values.end());
  const ObservationKind kind = table.observation(0).kind;

  const std::size_t m = f0.size();
  const std::span<const double> weights = table.measure().support_weights();
  std::vector<double> acc(m, 0.0);
  std::vector<double> f(m);
  std::size_t runs = 0;
  do {
    f.assign(f0.values().begin(), f0.values().end());
    for (std::size_t i = 1; i <= n; ++i) {
      const LikCurve& curve = table.curve_for(Observation{values[i - 1], kind});
      fold_step(f, curve, weights, schedule.weight(i), i);
    }
    for (std::size_t j = 0; j < m; ++j) acc[j] += f[j];
    ++runs;
  } while (std::next_permutation(values.begin(), values.end()));

  const double inv = 1.0 / static_cast<double>(runs);
  for (double& v : acc) v *= inv;
  return Density(f0.measure_ptr(), std::move(acc));
}

Density pare_exact(const Density& f0, std::span<const Observation> data,
                   const WeightSchedule& schedule, const SamplingModel& model) {
  const LikTable table(model, data, f0.measure_ptr());
  return pare_exact(f0, table, schedule);
}

Density iterate_average(std::span<const Density> iterates, const WeightSchedule& schedule) {
  if (iterates.empty()) throw std::invalid_argument("iterate_average: empty trace");
  const MeasurePtr& measure = iterates.front().measure_ptr();
  std::vector<double> acc(iterates.front().size(), 0.0);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < iterates.size(); ++i) {
    if (!iterates[i].measure().same_support(*measure))
      throw std::invalid_argument("iterate_average: iterates on different measures");
    const double w = schedule.weight(i + 1);
    total_weight += w;
    const std::span<const double> v = iterates[i].values();
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * v[j];
  }
  for (double& v : acc) v /= total_weight;
  return Density(measure, std::move(acc));
}

}  // namespace premix
