#pragma once

#include <stdexcept>
#include <string>

namespace perturblearn {

// Invalid configuration, malformed domain objects, bad arguments.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Failure to parse an input file (JSON/CSV).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Algorithmic failure on valid-looking input, e.g. a cycle in the influence
// structure before transitive reduction.
class AlgorithmError : public std::runtime_error {
public:
    explicit AlgorithmError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace perturblearn
