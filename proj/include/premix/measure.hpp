#ifndef PREMIX_MEASURE_HPP
#define PREMIX_MEASURE_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace premix {

// Dominating measure on the mixing parameter space: a uniform grid carrying
// composite-trapezoid quadrature weights for the Lebesgue part, plus explicit
// unit point masses (atoms).  Support points are laid out flat as
// [nodes..., atoms...] so that every consumer can treat them uniformly
// through support_point()/support_weight().
class DominatingMeasure {
 public:
  DominatingMeasure(std::vector<double> nodes, std::vector<double> quad_weights,
                    std::vector<double> atoms, double theta_lo, double theta_hi);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t support_size() const { return points_.size(); }

  double support_point(std::size_t j) const { return points_[j]; }
  double support_weight(std::size_t j) const { return weights_[j]; }
  std::span<const double> support_points() const { return points_; }
  std::span<const double> support_weights() const { return weights_; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> quad_weights() const { return quad_weights_; }
  std::span<const double> atoms() const { return atoms_; }

  double theta_lo() const { return theta_lo_; }
  double theta_hi() const { return theta_hi_; }

  // Index into the atom list for an exact location match.
  std::optional<std::size_t> atom_index(double location) const;

  bool same_support(const DominatingMeasure& other) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> quad_weights_;
  std::vector<double> atoms_;
  std::vector<double> points_;   // nodes then atoms
  std::vector<double> weights_;  // quad weights then 1s
  double theta_lo_;
  double theta_hi_;
};

using MeasurePtr = std::shared_ptr<const DominatingMeasure>;

// Uniform grid of m nodes on [theta_lo, theta_hi] with composite trapezoid
// weights, plus the given atoms.  Atoms must lie inside the interval and may
// not coincide with a grid node (they get dedicated support points).
MeasurePtr make_measure(double theta_lo, double theta_hi, std::size_t m,
                        std::vector<double> atoms = {});

// Purely atomic measure (no continuous part), e.g. a two-point parameter space.
MeasurePtr make_atomic_measure(std::vector<double> atoms);

// Nonnegative values on the measure's support, integrating to 1.
class Density {
 public:
  Density(MeasurePtr measure, std::vector<double> values);

  const DominatingMeasure& measure() const { return *measure_; }
  const MeasurePtr& measure_ptr() const { return measure_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  std::size_t size() const { return values_.size(); }

 private:
  MeasurePtr measure_;
  std::vector<double> values_;
};

// Integral of raw values against the measure (quadrature over nodes plus
// unit mass per atom).
double integrate_values(const DominatingMeasure& measure, std::span<const double> values);
double integrate(const Density& d);

// Scales nonnegative values to integrate to 1.  Throws DegenerateDensityError
// when the raw integral is zero (all mass lost).
Density normalize(std::vector<double> values, MeasurePtr measure);

// Probability mass the density puts on a single atom of its measure.
double mix_atom_mass(const Density& d, double atom_location);

// CSV with columns (theta, value, kind), kind in {node, atom}.
void write_density_csv(std::ostream& os, const Density& d);

}  // namespace premix

#endif  // PREMIX_MEASURE_HPP
