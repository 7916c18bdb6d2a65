#pragma once

#include <stdexcept>
#include <string>

namespace fleetmeter {

// Validation or computation failure. The CLI maps this to exit code 1.
class Error : public std::runtime_error {
public:
    explicit Error(std::string message) : std::runtime_error(std::move(message)) {}
};

} // namespace fleetmeter
