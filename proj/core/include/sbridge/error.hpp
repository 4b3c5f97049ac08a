#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace sbridge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, invalid parameters, schema violations.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Where a numerical failure happened. Fields are filled in as the error
/// propagates outward (the kernel knows the time and node, the driver adds
/// the iteration index).
struct FailureSite {
  std::optional<int> iteration;
  std::optional<double> time;
  std::optional<std::size_t> node;
  std::string field;

  std::string describe() const;
};

/// Base for errors that carry a FailureSite.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, FailureSite site);

  const FailureSite& site() const noexcept { return site_; }
  const std::string& reason() const noexcept { return reason_; }

  /// Copy of this error with the iteration index attached.
  [[noreturn]] virtual void rethrow_at_iteration(int iteration) const = 0;

 protected:
  std::string reason_;
  FailureSite site_;
};

/// A field that must be strictly positive has (too many) nodes below the
/// relative positivity floor.
class DegenerateFieldError : public NumericalError {
 public:
  DegenerateFieldError(const std::string& what, FailureSite site);
  [[noreturn]] void rethrow_at_iteration(int iteration) const override;
};

/// An explicit march exceeded the blow-up bound or produced non-finite values.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, FailureSite site);
  [[noreturn]] void rethrow_at_iteration(int iteration) const override;
};

}  // namespace sbridge
