#ifndef LEVYGLASS_ERRORS_HPP
#define LEVYGLASS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace levyglass {

// Conditioning threshold outside the range where the conditional law is a
// pure power law (above-mode needs R >= 1).
class unsupported_threshold : public std::invalid_argument {
public:
    explicit unsupported_threshold(const std::string& what)
        : std::invalid_argument(what) {}
};

// Site count beyond the exact-enumeration cap.
class capacity_exceeded : public std::runtime_error {
public:
    explicit capacity_exceeded(const std::string& what)
        : std::runtime_error(what) {}
};

// Audit invoked outside the hypothesis of the bound it checks.
class hypothesis_violated : public std::invalid_argument {
public:
    explicit hypothesis_violated(const std::string& what)
        : std::invalid_argument(what) {}
};

// Requested certificate does not exist for the given inputs.
class not_applicable : public std::runtime_error {
public:
    explicit not_applicable(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace levyglass

#endif
