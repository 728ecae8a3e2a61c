#ifndef PREMIX_RNG_HPP
#define PREMIX_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace premix {

// mt19937_64 engine with hand-rolled variate generators.  The standard
// distribution classes are implementation-defined, so rolling our own keeps
// every sampled sequence identical across compilers and standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  // Independent stream for (seed, stream_id); used to give each permutation,
  // importance-sampling pass, and replicate its own reproducible stream.
  static RandomStream derive(std::uint64_t seed, std::uint64_t stream_id);

  double uniform01();                            // [0, 1)
  std::uint64_t uniform_below(std::uint64_t n);  // unbiased in [0, n)
  double normal(double mean = 0.0, double sd = 1.0);
  double gamma(double shape, double rate);
  double beta(double a, double b);
  long poisson(double mean);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t j = v.size(); j > 1; --j) {
      std::size_t k = static_cast<std::size_t>(uniform_below(j));
      std::swap(v[j - 1], v[k]);
    }
  }

 private:
  double gamma_shape_ge1(double shape);

  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace premix

#endif  // PREMIX_RNG_HPP
