#pragma once

#include <stdexcept>
#include <string>

namespace mqms {

// Input violates a model/argument invariant. The CLI maps this to exit code 2.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An enumeration would exceed its configured size cap.
class CapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mqms
