#ifndef PREMIX_ERRORS_HPP
#define PREMIX_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace premix {

// Raised when a density update collapses to zero mass everywhere.  This
// signals a kernel/data support mismatch (e.g. an observation far outside
// the support of the mixing measure), not a recoverable numerical blip.
class DegenerateDensityError : public std::runtime_error {
 public:
  explicit DegenerateDensityError(const std::string& what,
                                  std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(what), step_(step) {}

  // 1-based index of the observation that triggered the collapse, when known.
  std::optional<std::size_t> step() const { return step_; }

 private:
  std::optional<std::size_t> step_;
};

}  // namespace premix

#endif  // PREMIX_ERRORS_HPP
