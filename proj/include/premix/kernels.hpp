#ifndef PREMIX_KERNELS_HPP
#define PREMIX_KERNELS_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "premix/measure.hpp"
#include "premix/rng.hpp"

namespace premix {

enum class ObservationKind { real_value, count };

struct Observation {
  double value = 0.0;
  ObservationKind kind = ObservationKind::real_value;

  static Observation real(double x) { return {x, ObservationKind::real_value}; }
  static Observation count(long k);
};

// Sampling model p(x|theta): log-density evaluation plus forward sampling.
// Implementations are stateless; randomness is passed in explicitly.
class SamplingModel {
 public:
  virtual ~SamplingModel() = default;
  virtual double log_density(const Observation& x, double theta) const = 0;
  virtual Observation draw(double theta, RandomStream& rng) const = 0;
  virtual ObservationKind observation_kind() const = 0;
  virtual std::string name() const = 0;
};

// Normal(theta, sigma^2) with fixed sigma.
class NormalKernel final : public SamplingModel {
 public:
  explicit NormalKernel(double sigma = 0.1);
  double sigma() const { return sigma_; }
  double log_density(const Observation& x, double theta) const override;
  Observation draw(double theta, RandomStream& rng) const override;
  ObservationKind observation_kind() const override { return ObservationKind::real_value; }
  std::string name() const override;

 private:
  double sigma_;
  double log_norm_;
};

// Poisson(theta).  At the theta = 0 boundary the density is the point mass
// at x = 0: log p(0|0) = 0 and log p(x|0) = -inf for x > 0.
class PoissonKernel final : public SamplingModel {
 public:
  double log_density(const Observation& x, double theta) const override;
  Observation draw(double theta, RandomStream& rng) const override;
  ObservationKind observation_kind() const override { return ObservationKind::count; }
  std::string name() const override { return "poisson"; }
};

// Gamma with rate theta and fixed shape alpha > 0.
class GammaRateKernel final : public SamplingModel {
 public:
  explicit GammaRateKernel(double shape);
  double shape() const { return shape_; }
  double log_density(const Observation& x, double theta) const override;
  Observation draw(double theta, RandomStream& rng) const override;
  ObservationKind observation_kind() const override { return ObservationKind::real_value; }
  std::string name() const override;

 private:
  double shape_;
};

// Kernel evaluations of one observation over a measure's support, held in the
// scaled form p(x|theta_j) = scaled[j] * exp(log_scale) with log_scale the
// maximum log-density.  Dot products against densities then stay in a safe
// floating-point range regardless of how small the likelihood gets.
struct LikCurve {
  std::vector<double> scaled;
  double log_scale = 0.0;
};

LikCurve make_lik_curve(const SamplingModel& model, const Observation& x,
                        const DominatingMeasure& measure);

// p(x|theta_j) for every support point j (log-space evaluation, exponentiated
// with max-subtraction and rescaled back).
std::vector<double> loglik_curve(const SamplingModel& model, const Observation& x,
                                 const DominatingMeasure& measure);

// log p_f(x) = log of the mixture marginal of f at x; -inf when the curve and
// density have disjoint support.
double log_marginal(const LikCurve& curve, const Density& f);

// Density proportional to curve * f, exactly normalized.
Density posterior_from_curve(const LikCurve& curve, const Density& f);

// Mixture marginal p_f(x) = integral of p(x|theta) f(theta).  Throws
// DegenerateDensityError when the result is zero.
double marginal_density(const SamplingModel& model, const Density& f, const Observation& x);

// Bayes-update of f by the single observation x, exactly normalized.
Density posterior_reweight(const SamplingModel& model, const Density& f, const Observation& x);

// Per-dataset cache of likelihood curves, deduplicated by observation value.
// Shared by every estimator run on the same data (the recursion revisits each
// observation once per permutation; count data repeats values heavily).
class LikTable {
 public:
  LikTable(const SamplingModel& model, std::span<const Observation> xs, MeasurePtr measure);

  std::size_t size() const { return obs_.size(); }
  const Observation& observation(std::size_t i) const { return obs_[i]; }
  const LikCurve& curve(std::size_t i) const { return curves_[obs_to_distinct_[i]]; }
  const LikCurve& curve_for(const Observation& x) const;

  std::size_t num_distinct() const { return curves_.size(); }
  const LikCurve& distinct_curve(std::size_t u) const { return curves_[u]; }
  double multiplicity(std::size_t u) const { return multiplicity_[u]; }

  const MeasurePtr& measure_ptr() const { return measure_; }
  const DominatingMeasure& measure() const { return *measure_; }

 private:
  MeasurePtr measure_;
  std::vector<Observation> obs_;
  std::vector<std::size_t> obs_to_distinct_;
  std::vector<LikCurve> curves_;
  std::vector<double> multiplicity_;
  std::map<double, std::size_t> index_by_value_;
};

}  // namespace premix

#endif  // PREMIX_KERNELS_HPP
