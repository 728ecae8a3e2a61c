#include "premix/measure.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "premix/errors.hpp"
#include "premix/numerics.hpp"

namespace premix {

DominatingMeasure::DominatingMeasure(std::vector<double> nodes,
                                     std::vector<double> quad_weights,
                                     std::vector<double> atoms, double theta_lo,
                                     double theta_hi)
    : nodes_(std::move(nodes)),
      quad_weights_(std::move(quad_weights)),
      atoms_(std::move(atoms)),
      theta_lo_(theta_lo),
      theta_hi_(theta_hi) {
  if (nodes_.size() != quad_weights_.size())
    throw std::invalid_argument("measure: nodes and quad_weights length mismatch");
  for (std::size_t j = 1; j < nodes_.size(); ++j)
    if (!(nodes_[j - 1] < nodes_[j]))
      throw std::invalid_argument("measure: nodes must be strictly increasing");
  for (double w : quad_weights_)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("measure: quadrature weights must be nonnegative");
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    for (std::size_t b = a + 1; b < atoms_.size(); ++b)
      if (atoms_[a] == atoms_[b])
        throw std::invalid_argument("measure: atom locations must be pairwise distinct");
    if (std::binary_search(nodes_.begin(), nodes_.end(), atoms_[a]))
      throw std::invalid_argument("measure: atom coincides with a grid node");
  }
  points_ = nodes_;
  points_.insert(points_.end(), atoms_.begin(), atoms_.end());
  weights_ = quad_weights_;
  weights_.insert(weights_.end(), atoms_.size(), 1.0);
}

std::optional<std::size_t> DominatingMeasure::atom_index(double location) const {
  for (std::size_t a = 0; a < atoms_.size(); ++a)
    if (atoms_[a] == location) return a;
  return std::nullopt;
}

bool DominatingMeasure::same_support(const DominatingMeasure& other) const {
  return this == &other || (nodes_ == other.nodes_ && atoms_ == other.atoms_ &&
                            quad_weights_ == other.quad_weights_);
}

MeasurePtr make_measure(double theta_lo, double theta_hi, std::size_t m,
                        std::vector<double> atoms) {
  if (!(theta_lo < theta_hi))
    throw std::invalid_argument("make_measure: interval is reversed or empty");
  if (m < 2) throw std::invalid_argument("make_measure: need at least 2 grid nodes");
  for (double a : atoms)
    if (!(a >= theta_lo && a <= theta_hi))
      throw std::invalid_argument("make_measure: atom outside the theta interval");

  const double h = (theta_hi - theta_lo) / static_cast<double>(m - 1);
  std::vector<double> nodes(m), weights(m, h);
  for (std::size_t j = 0; j < m; ++j) nodes[j] = theta_lo + static_cast<double>(j) * h;
  nodes.back() = theta_hi;
  weights.front() = weights.back() = 0.5 * h;

  return std::make_shared<DominatingMeasure>(std::move(nodes), std::move(weights),
                                             std::move(atoms), theta_lo, theta_hi);
}

MeasurePtr make_atomic_measure(std::vector<double> atoms) {
  if (atoms.empty()) throw std::invalid_argument("make_atomic_measure: no atoms given");
  const auto [lo, hi] = std::minmax_element(atoms.begin(), atoms.end());
  return std::make_shared<DominatingMeasure>(std::vector<double>{}, std::vector<double>{},
                                             atoms, *lo, *hi);
}

double integrate_values(const DominatingMeasure& measure, std::span<const double> values) {
  if (values.size() != measure.support_size())
    throw std::invalid_argument("integrate: value vector does not match the measure support");
  double sum = 0.0, carry = 0.0;
  const std::span<const double> w = measure.support_weights();
  for (std::size_t j = 0; j < values.size(); ++j) {
    double y = values[j] * w[j] - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double integrate(const Density& d) { return integrate_values(d.measure(), d.values()); }

Density::Density(MeasurePtr measure, std::vector<double> values)
    : measure_(std::move(measure)), values_(std::move(values)) {
  if (!measure_) throw std::invalid_argument("density: null measure");
  if (values_.size() != measure_->support_size())
    throw std::invalid_argument("density: value vector does not match the measure support");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("density: values must be finite and nonnegative");
  const double total = integrate_values(*measure_, values_);
  if (std::abs(total - 1.0) > 1e-6)
    throw std::invalid_argument("density: values do not integrate to 1");
  assert(std::abs(total - 1.0) <= 1e-9);
}

Density normalize(std::vector<double> values, MeasurePtr measure) {
  if (!measure) throw std::invalid_argument("normalize: null measure");
  if (values.size() != measure->support_size())
    throw std::invalid_argument("normalize: value vector does not match the measure support");
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("normalize: values must be finite and nonnegative");
  const double total = integrate_values(*measure, values);
  if (!(total > 0.0) || !std::isfinite(total))
    throw DegenerateDensityError(
        "normalize: density integrates to zero; observation outside kernel support?");
  for (double& v : values) v /= total;
  return Density(std::move(measure), std::move(values));
}

double mix_atom_mass(const Density& d, double atom_location) {
  const auto idx = d.measure().atom_index(atom_location);
  if (!idx) throw std::invalid_argument("mix_atom_mass: unknown atom location");
  return d[d.measure().num_nodes() + *idx];
}

void write_density_csv(std::ostream& os, const Density& d) {
  const DominatingMeasure& mu = d.measure();
  os << "theta,value,kind\n";
  char buf[64];
  for (std::size_t j = 0; j < mu.support_size(); ++j) {
    const char* kind = j < mu.num_nodes() ? "node" : "atom";
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%s\n", mu.support_point(j), d[j], kind);
    os << buf;
  }
}

}  // namespace premix
