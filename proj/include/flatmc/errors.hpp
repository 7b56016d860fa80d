#pragma once
#include <stdexcept>
#include <string>

namespace flatmc {

// Bad arguments: dimension mismatches, unknown rules, ordering violations.
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A proposition's structural hypothesis does not hold for the given object
// (non-unique minimal precision, injectivity failure, 6e^{24/d}m0 >= L0, ...).
struct hypothesis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A stated precondition of a bound/estimate is violated by the inputs.
struct precondition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Overflow / non-finite intermediates that the caller must fix by rescaling.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A chain state became non-finite; carries the iteration index.
struct divergence_error : std::runtime_error {
  long iteration;
  divergence_error(const std::string& what, long iter)
      : std::runtime_error(what + " at iteration " + std::to_string(iter)),
        iteration(iter) {}
};

// Rejection-sampler envelope too loose (acceptance rate below floor).
struct envelope_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested functionality outside the supported regime (d > 2 quadrature, ...).
struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace flatmc
