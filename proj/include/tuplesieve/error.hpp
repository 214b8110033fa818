#ifndef TUPLESIEVE_ERROR_HPP
#define TUPLESIEVE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace tuplesieve {

// Invalid arguments: out-of-range parameters, malformed tuples, non-squarefree
// moduli. Maps to the usage exit code in the CLI.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A memory or time budget would be exceeded.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// An independent re-check of a reported witness disagreed with the detector.
class VerificationError : public std::runtime_error {
public:
    explicit VerificationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tuplesieve

#endif // TUPLESIEVE_ERROR_HPP
