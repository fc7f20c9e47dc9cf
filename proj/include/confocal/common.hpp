#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace confocal {

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using cplx = std::complex<double>;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

/// Default constraint tolerance for states on a constrained phase space.
inline constexpr double kDefaultCtol = 1e-9;

// ---------------------------------------------------------------------------
// Errors. Every error carries a category that the command-line front end maps
// onto its exit code.

enum class ErrorCategory { Config, Numeric, Domain };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

#define CONFOCAL_DEFINE_ERROR(Name, Category)                     \
  class Name : public Error {                                     \
   public:                                                        \
    explicit Name(const std::string& what)                        \
        : Error(ErrorCategory::Category, #Name ": " + what) {}    \
  };

CONFOCAL_DEFINE_ERROR(DimensionError, Domain)
CONFOCAL_DEFINE_ERROR(InvalidSpecError, Config)
CONFOCAL_DEFINE_ERROR(ConfigError, Config)
CONFOCAL_DEFINE_ERROR(SymmetricChartError, Domain)
CONFOCAL_DEFINE_ERROR(DegenerateChartError, Domain)
CONFOCAL_DEFINE_ERROR(InvalidCoordsError, Domain)
CONFOCAL_DEFINE_ERROR(PoleError, Numeric)
CONFOCAL_DEFINE_ERROR(ConstraintViolationError, Numeric)
CONFOCAL_DEFINE_ERROR(SingularAxisError, Numeric)
CONFOCAL_DEFINE_ERROR(MultiplierSingularError, Numeric)
CONFOCAL_DEFINE_ERROR(ProjectionError, Numeric)
CONFOCAL_DEFINE_ERROR(ReductionSingularError, Numeric)
CONFOCAL_DEFINE_ERROR(InvariantVarietyError, Domain)
CONFOCAL_DEFINE_ERROR(SymmetricSpecError, Domain)
CONFOCAL_DEFINE_ERROR(GrazingOrSingularError, Numeric)
CONFOCAL_DEFINE_ERROR(FormulaConsistencyError, Numeric)
CONFOCAL_DEFINE_ERROR(EscapeError, Numeric)

#undef CONFOCAL_DEFINE_ERROR

inline void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) +
                         ", got " + std::to_string(got));
}

// ---------------------------------------------------------------------------
// Portable random numbers. The engine is std::mt19937_64 (its output sequence
// is fixed by the standard); the floating-point transforms are implemented here
// rather than through <random> distributions, whose algorithms differ between
// standard libraries.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (the second variate is discarded).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec normal_vector(Eigen::Index n) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }

  std::uint64_t next_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace confocal
