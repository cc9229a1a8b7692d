#pragma once

#include <stdexcept>
#include <string>

namespace aedg {

/// Argument outside the mathematical domain of a routine (e.g. |x| > 1 for Legendre evaluation).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Invalid mesh or mapping: non-abutting boxes, inverted elements, self-intersecting curves.
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad run configuration: unknown keys, unknown tags, out-of-range parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Broken precondition of a kernel (non-orthonormal frame, mismatched trace sizes).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

/// Singular element operator; indicates a wrong row-replacement choice or degenerate geometry.
struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite values or energy blow-up during time stepping.
struct IntegrationError : std::runtime_error {
  IntegrationError(const std::string& what, double time)
      : std::runtime_error(what + " (t = " + std::to_string(time) + ")"), t(time) {}
  double t;
};

}  // namespace aedg
