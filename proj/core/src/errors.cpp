#include "chainlab/errors.hpp"

#include <sstream>

namespace chainlab {

namespace {

template <class... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}

}  // namespace

AsymmetryError::AsymmetryError(std::size_t i_, std::size_t j_, double dij, double dji)
    : Error(concat("asymmetric distance: d[", i_, "][", j_, "]=", dij, " but d[", j_, "][", i_,
                   "]=", dji)),
      i(i_),
      j(j_) {}

NegativeDistanceError::NegativeDistanceError(std::size_t i_, std::size_t j_, double value)
    : Error(concat("negative distance d[", i_, "][", j_, "]=", value)), i(i_), j(j_) {}

TriangleViolation::TriangleViolation(std::size_t i, std::size_t j, std::size_t k, double dik,
                                     double dij, double djk)
    : Error(concat("triangle inequality violated at (", i, ",", j, ",", k, "): ", dik, " > ", dij,
                   " + ", djk)),
      witness{i, j, k} {}

SizeLimitExceeded::SizeLimitExceeded(const std::string& what, std::size_t size, std::size_t limit)
    : Error(concat(what, ": size ", size, " exceeds limit ", limit)) {}

ZeroDistancePair::ZeroDistancePair(std::size_t a, std::size_t b)
    : Error(concat("pair (", a, ",", b, ") has zero canonical distance")) {}

}  // namespace chainlab
