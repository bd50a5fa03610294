#pragma once

#include <stdexcept>
#include <string>

namespace causalmb {

// Bad inputs: unknown names, violated preconditions, malformed files.
// The CLI maps this to exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A hard size ceiling was exceeded (e.g. exhaustive enumeration caps).
// The CLI maps this to exit code 3.
class capacity_error : public std::runtime_error {
public:
    explicit capacity_error(const std::string& what) : std::runtime_error(what) {}
};

// Conditioning on an event of probability zero during exact inference.
class zero_evidence_error : public std::runtime_error {
public:
    explicit zero_evidence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace causalmb
