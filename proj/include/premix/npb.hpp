#ifndef PREMIX_NPB_HPP
#define PREMIX_NPB_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "premix/kernels.hpp"
#include "premix/measure.hpp"
#include "premix/rng.hpp"

namespace premix {

// Dirichlet-process prior over the mixing density: precision c and base f0.
struct DPConfig {
  double c = 1.0;
  Density f0;
};

// State of one sequential importance-sampling pass, collapsed onto the
// clustering configuration.  Labels are 1-based and follow the
// least-unused-label convention, so `assignments` is a restricted-growth
// string over the processing order.
struct ClusterState {
  std::vector<int> assignments;
  std::vector<int> cluster_sizes;           // index ell-1 holds n_ell
  std::vector<Density> cluster_densities;   // per-cluster posterior mean of theta-density
  double log_weight = 0.0;
  int num_clusters() const { return static_cast<int>(cluster_sizes.size()); }
};

struct SisResult {
  ClusterState state;
  Density mean_density;  // E[f | data, clustering] = (c f0 + sum n_ell f^(ell)) / (c + n)
};

// One pass of the collapsed sampler: cluster labels are drawn sequentially
// from their exact conditional posterior and the importance weight
// accumulates the sequential predictive densities (kept in log space).
SisResult sis_pass(std::span<const Observation> data, const DPConfig& dp,
                   const SamplingModel& model, RandomStream& rng);
SisResult sis_pass(const LikTable& table, std::span<const std::size_t> order,
                   const DPConfig& dp, RandomStream& rng);

struct PassDiagnostics {
  double log_weight;
  int num_clusters;
};

struct NpbOptions {
  bool permute_each_pass = true;
  unsigned workers = 1;
  bool collect_diagnostics = false;
};

struct NpbEstimate {
  Density density;
  double ess = 0.0;
  double log_marginal = 0.0;  // log of the mean importance weight
  std::size_t num_samples = 0;
  std::vector<PassDiagnostics> diagnostics;  // filled when requested
};

// Posterior-mean estimate from R independent passes, combined as a weighted
// average with weights handled in log space.  Deterministic for a given seed
// independent of worker count.
NpbEstimate npb_estimate(std::span<const Observation> data, const DPConfig& dp,
                         const SamplingModel& model, std::size_t R, std::uint64_t seed,
                         const NpbOptions& options = {});
NpbEstimate npb_estimate(const LikTable& table, const DPConfig& dp, std::size_t R,
                         std::uint64_t seed, const NpbOptions& options = {});

// Effective sample size (sum w)^2 / sum w^2; invariant to rescaling.
double ess(std::span<const double> weights);
double ess_from_log(std::span<const double> log_weights);

struct ExactNpb {
  Density density;
  double log_marginal;
};

// Brute-force posterior mean over all set partitions (guarded to n <= 8):
// exact Ewens partition probabilities times cluster marginal likelihoods.
ExactNpb enumerate_exact(std::span<const Observation> data, const DPConfig& dp,
                         const SamplingModel& model);

namespace detail {
// Visits every restricted-growth string of length n (0-based labels).
void for_each_set_partition(std::size_t n, const std::function<void(std::span<const int>)>& fn);
}  // namespace detail

}  // namespace premix

#endif  // PREMIX_NPB_HPP
