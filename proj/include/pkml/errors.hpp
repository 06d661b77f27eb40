#pragma once

#include <stdexcept>
#include <string>

namespace pkml {

// Argument outside the mathematical domain of a function (n = 0 for Λ, q = 0 for μ, ...).
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Parameter violates an operation's precondition (pmax too small, x < H, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

// Request exceeds a cost guard (subset enumeration, composition count, tuple size).
class SizeError : public std::invalid_argument {
public:
    explicit SizeError(const std::string& what) : std::invalid_argument(what) {}
};

// A sum needs Λ(n) for n beyond the sieved range.
class CoverageError : public std::out_of_range {
public:
    explicit CoverageError(const std::string& what) : std::out_of_range(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pkml
