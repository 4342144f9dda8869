#pragma once

#include <stdexcept>
#include <string>

namespace fdsr {

// Raised when a closed-form quantity leaves the region where the model is
// defined, e.g. a nonpositive SNR denominator.
class ModelViolation : public std::domain_error {
public:
  explicit ModelViolation(const std::string& what) : std::domain_error(what) {}
};

}  // namespace fdsr
