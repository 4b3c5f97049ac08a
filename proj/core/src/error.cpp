#include "sbridge/error.hpp"

#include <fmt/core.h>

namespace sbridge {

std::string FailureSite::describe() const {
  std::string out;
  auto append = [&out](const std::string& part) {
    if (!out.empty()) out += ", ";
    out += part;
  };
  if (!field.empty()) append("field " + field);
  if (iteration) append(fmt::format("iteration {}", *iteration));
  if (time) append(fmt::format("t={:.10g}", *time));
  if (node) append(fmt::format("node {}", *node));
  return out;
}

namespace {
std::string compose(const std::string& what, const FailureSite& site) {
  const std::string where = site.describe();
  return where.empty() ? what : what + " (" + where + ")";
}
}  // namespace

NumericalError::NumericalError(const std::string& what, FailureSite site)
    : Error(compose(what, site)), reason_(what), site_(std::move(site)) {}

DegenerateFieldError::DegenerateFieldError(const std::string& what, FailureSite site)
    : NumericalError(what, std::move(site)) {}

void DegenerateFieldError::rethrow_at_iteration(int iteration) const {
  FailureSite s = site_;
  s.iteration = iteration;
  throw DegenerateFieldError(reason_, std::move(s));
}

BlowUpError::BlowUpError(const std::string& what, FailureSite site)
    : NumericalError(what, std::move(site)) {}

void BlowUpError::rethrow_at_iteration(int iteration) const {
  FailureSite s = site_;
  s.iteration = iteration;
  throw BlowUpError(reason_, std::move(s));
}

}  // namespace sbridge
