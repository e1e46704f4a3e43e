#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <stdexcept>
#include <string>

namespace opuclab {

namespace mp = boost::multiprecision;

// Arbitrary-precision real with runtime-selectable mantissa. Expression
// templates are off so values behave like plain scalars inside containers
// and the complex wrapper.
using Real = mp::number<mp::mpfr_float_backend<0>, mp::et_off>;

// Invalid user input or malformed data (CLI exit code 2).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation refused to run because the requested precision cannot
// represent the dynamic range involved (CLI exit code 3).
struct PrecisionGateError : std::runtime_error {
  explicit PrecisionGateError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iteration failed to converge within its budget (CLI exit code 4).
struct ConvergenceError : std::runtime_error {
  explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Restores the thread's default mpfr precision on scope exit.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits10) : saved_(Real::default_precision()) {
    Real::default_precision(digits10);
  }
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

// Shared numeric configuration threaded through every algorithm.
struct PrecisionContext {
  unsigned mantissa_bits = 256;     // >= 64
  unsigned base_quad_points = 4096; // starting node count for adaptive rules

  PrecisionContext() = default;
  explicit PrecisionContext(unsigned bits, unsigned base_points = 4096)
      : mantissa_bits(bits), base_quad_points(base_points) {
    validate();
  }

  void validate() const {
    if (mantissa_bits < 64)
      throw ValidationError("mantissa_bits must be at least 64, got " +
                            std::to_string(mantissa_bits));
    if (base_quad_points < 4)
      throw ValidationError("base_quad_points must be at least 4");
  }

  // Decimal digits that guarantee at least mantissa_bits of binary mantissa.
  unsigned digits10() const {
    return static_cast<unsigned>(mantissa_bits * 0.3010299956639812) + 2;
  }

  // Working tolerance 2^-(mantissa_bits/4).
  Real tol() const;

  // Activate this context's precision for the current scope.
  [[nodiscard]] PrecisionScope activate() const { return PrecisionScope(digits10()); }
};

// pi at the currently active precision (cached per precision level).
const Real& pi_val();
// log(2) at the currently active precision (cached per precision level).
const Real& log2_val();

inline bool is_finite(const Real& x) { return mpfr_number_p(x.backend().data()) != 0; }

}  // namespace opuclab
