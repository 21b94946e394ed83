#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypertile {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Points of every model are flat coordinate vectors. Height (t, or v for the
// horospherical model) is always the last coordinate.
using Point = Eigen::VectorXd;

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when an internal invariant that a lemma guarantees does not hold.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace hypertile
