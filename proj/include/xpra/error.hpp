#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xpra {

/// Machine-readable failure category carried by every library error.
enum class ErrorKind {
  format,
  size,
  io,
  degenerate_input,
  insufficient_samples,
  thin_violation,
  rank,
  shape,
  divergence,
  convergence,
  numerical,
  trivial_instance,
  degenerate_mask,
  invalid_argument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace xpra
