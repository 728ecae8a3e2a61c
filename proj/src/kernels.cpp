#include "premix/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "premix/errors.hpp"
#include "premix/numerics.hpp"

namespace premix {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
}

Observation Observation::count(long k) {
  if (k < 0) throw std::invalid_argument("observation: count must be nonnegative");
  return {static_cast<double>(k), ObservationKind::count};
}

NormalKernel::NormalKernel(double sigma) : sigma_(sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("normal kernel: sigma must be positive");
  log_norm_ = -std::log(sigma_) - 0.5 * kLogTwoPi;
}

double NormalKernel::log_density(const Observation& x, double theta) const {
  const double z = (x.value - theta) / sigma_;
  return log_norm_ - 0.5 * z * z;
}

Observation NormalKernel::draw(double theta, RandomStream& rng) const {
  return Observation::real(rng.normal(theta, sigma_));
}

std::string NormalKernel::name() const { return "normal(sigma=" + std::to_string(sigma_) + ")"; }

double PoissonKernel::log_density(const Observation& x, double theta) const {
  const double k = x.value;
  if (theta == 0.0) return k == 0.0 ? 0.0 : kNegInf;
  if (theta < 0.0) return kNegInf;
  return k * std::log(theta) - theta - std::lgamma(k + 1.0);
}

Observation PoissonKernel::draw(double theta, RandomStream& rng) const {
  if (theta < 0.0) throw std::invalid_argument("poisson kernel: negative mean");
  return Observation::count(rng.poisson(theta));
}

GammaRateKernel::GammaRateKernel(double shape) : shape_(shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma kernel: shape must be positive");
}

double GammaRateKernel::log_density(const Observation& x, double theta) const {
  if (!(x.value > 0.0) || !(theta > 0.0)) return kNegInf;
  return shape_ * std::log(theta) + (shape_ - 1.0) * std::log(x.value) - theta * x.value -
         std::lgamma(shape_);
}

Observation GammaRateKernel::draw(double theta, RandomStream& rng) const {
  if (!(theta > 0.0)) throw std::invalid_argument("gamma kernel: rate must be positive");
  return Observation::real(rng.gamma(shape_, theta));
}

std::string GammaRateKernel::name() const {
  return "gamma(shape=" + std::to_string(shape_) + ")";
}

LikCurve make_lik_curve(const SamplingModel& model, const Observation& x,
                        const DominatingMeasure& measure) {
  if (x.kind != model.observation_kind())
    throw std::invalid_argument("likelihood: observation kind does not match the kernel");
  const std::size_t n = measure.support_size();
  LikCurve curve;
  curve.scaled.resize(n);
  std::vector<double>& log_vals = curve.scaled;  // reuse storage
  double max_log = kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    const double lp = model.log_density(x, measure.support_point(j));
    log_vals[j] = lp;
    if (lp > max_log) max_log = lp;
  }
  curve.log_scale = max_log;
  if (max_log == kNegInf) {
    for (double& v : log_vals) v = 0.0;
    return curve;
  }
  for (double& v : log_vals) v = std::exp(v - max_log);
  return curve;
}

std::vector<double> loglik_curve(const SamplingModel& model, const Observation& x,
                                 const DominatingMeasure& measure) {
  LikCurve curve = make_lik_curve(model, x, measure);
  const double scale = std::exp(curve.log_scale);
  for (double& v : curve.scaled) v *= scale;
  return std::move(curve.scaled);
}

double log_marginal(const LikCurve& curve, const Density& f) {
  const std::span<const double> w = f.measure().support_weights();
  const std::span<const double> v = f.values();
  double dot = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) dot += curve.scaled[j] * v[j] * w[j];
  if (!(dot > 0.0)) return kNegInf;
  return curve.log_scale + std::log(dot);
}

Density posterior_from_curve(const LikCurve& curve, const Density& f) {
  const std::span<const double> v = f.values();
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = curve.scaled[j] * v[j];
  return normalize(std::move(out), f.measure_ptr());
}

double marginal_density(const SamplingModel& model, const Density& f, const Observation& x) {
  const LikCurve curve = make_lik_curve(model, x, f.measure());
  const double lm = log_marginal(curve, f);
  if (lm == kNegInf)
    throw DegenerateDensityError("marginal_density: observation has zero marginal density");
  return std::exp(lm);
}

Density posterior_reweight(const SamplingModel& model, const Density& f, const Observation& x) {
  return posterior_from_curve(make_lik_curve(model, x, f.measure()), f);
}

LikTable::LikTable(const SamplingModel& model, std::span<const Observation> xs,
                   MeasurePtr measure)
    : measure_(std::move(measure)), obs_(xs.begin(), xs.end()) {
  if (!measure_) throw std::invalid_argument("likelihood table: null measure");
  obs_to_distinct_.reserve(obs_.size());
  for (const Observation& x : obs_) {
    auto [it, inserted] = index_by_value_.try_emplace(x.value, curves_.size());
    if (inserted) {
      curves_.push_back(make_lik_curve(model, x, *measure_));
      multiplicity_.push_back(0.0);
    }
    multiplicity_[it->second] += 1.0;
    obs_to_distinct_.push_back(it->second);
  }
}

const LikCurve& LikTable::curve_for(const Observation& x) const {
  const auto it = index_by_value_.find(x.value);
  if (it == index_by_value_.end())
    throw std::invalid_argument("likelihood table: observation not in table");
  return curves_[it->second];
}

}  // namespace premix
