#ifndef PREMIX_RECURSION_HPP
#define PREMIX_RECURSION_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "premix/kernels.hpp"
#include "premix/measure.hpp"

namespace premix {

// Step sizes w_i = (i^alpha + 1)^{-1} for alpha in (0.5, 1].  This range
// gives a divergent weight sum with square-summable terms; alpha = 1 is the
// usual w_i = (i + 1)^{-1}.
class WeightSchedule {
 public:
  explicit WeightSchedule(double alpha = 1.0);
  double alpha() const { return alpha_; }
  double weight(std::size_t i) const;  // i >= 1

 private:
  double alpha_;
};

struct StepRecord {
  std::size_t index;  // 1-based observation index within the run
  double weight;      // w_i
  double marginal;    // p_{i-1}(X_i)
};

struct RecursionTrace {
  std::vector<StepRecord> steps;
  std::vector<std::size_t> checkpoint_steps;   // sorted; 0 = initial estimate
  std::vector<Density> checkpoint_densities;   // parallel to checkpoint_steps
  std::vector<double> checkpoint_kl_theta;     // K(f, f_i); filled when truth given
  std::vector<Density> iterates;               // f_1..f_n when retained
};

struct ReRunOptions {
  std::vector<std::size_t> checkpoints;  // step indices to snapshot
  bool retain_iterates = false;
  const Density* truth = nullptr;  // mixing-scale KL recorded at checkpoints
};

struct ReRunResult {
  Density final;
  RecursionTrace trace;
};

// One recursive update: f = (1 - w) f_prev + w * Bayes-posterior(f_prev; x).
Density re_update(const Density& f_prev, const Observation& x, double w,
                  const SamplingModel& model);

// Folds re_update over the data in the given order.  Deterministic; a zero
// marginal at step i aborts with DegenerateDensityError carrying i.
ReRunResult re_run(const Density& f0, std::span<const Observation> data,
                   const WeightSchedule& schedule, const SamplingModel& model,
                   const ReRunOptions& options = {});

// Same, against a prebuilt likelihood table (processing order = table order).
ReRunResult re_run(const Density& f0, const LikTable& table, const WeightSchedule& schedule,
                   const ReRunOptions& options = {});

// Monte Carlo permutation average: mean of re_run over num_perms uniformly
// random data orderings.  Bit-reproducible for a given seed regardless of the
// worker count (per-permutation streams, reduction in index order).
Density pare_run(const Density& f0, std::span<const Observation> data,
                 const WeightSchedule& schedule, const SamplingModel& model,
                 std::size_t num_perms, std::uint64_t seed, unsigned workers = 1);
Density pare_run(const Density& f0, const LikTable& table, const WeightSchedule& schedule,
                 std::size_t num_perms, std::uint64_t seed, unsigned workers = 1);

// Exact average over all data orderings (guarded to n <= 8).  Enumeration
// starts from the value-sorted arrangement, so the result is identical for
// any shuffle of the input.
Density pare_exact(const Density& f0, std::span<const Observation> data,
                   const WeightSchedule& schedule, const SamplingModel& model);
Density pare_exact(const Density& f0, const LikTable& table, const WeightSchedule& schedule);

// Weighted average of the iterates f_1..f_n with weights w_i.
Density iterate_average(std::span<const Density> iterates, const WeightSchedule& schedule);

// The data ordering the k-th permutation of pare_run uses (exposed for tests).
std::vector<std::size_t> permutation_for(std::uint64_t seed, std::size_t perm_index,
                                         std::size_t n);

}  // namespace premix

#endif  // PREMIX_RECURSION_HPP
