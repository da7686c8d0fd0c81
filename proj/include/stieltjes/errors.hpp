#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace stieltjes {

// Base class; every library failure derives from it.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct domain_error : error {
  using error::error;
};

struct argument_error : error {
  using error::error;
};

// A sample of a user-supplied function was NaN or infinite.
struct evaluation_error : error {
  using error::error;
};

// An extrapolated quantity failed to settle. Carries the last two estimates.
struct convergence_error : error {
  convergence_error(const std::string& what, std::complex<double> last,
                    std::complex<double> previous)
      : error(what), last(last), previous(previous) {}
  std::complex<double> last;
  std::complex<double> previous;
};

// A time-stepping run produced a non-finite state.
struct divergence_error : error {
  divergence_error(const std::string& what, double last_good)
      : error(what), last_good_node(last_good) {}
  double last_good_node;
};

// A solver precondition (series gate, eigenvalue gate) does not hold.
struct gate_error : error {
  using error::error;
};

// Operation requested on the wrong kind of two-variable derivator.
struct tag_error : error {
  using error::error;
};

struct no_solution_error : error {
  using error::error;
};

// Construction-time invariant violation.
struct validation_error : error {
  using error::error;
};

struct parse_error : error {
  using error::error;
};

}  // namespace stieltjes
