#pragma once

#include <stdexcept>
#include <string>

namespace bnc {

// Malformed model or query structure (bad scopes, missing variables, ...).
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

// Arithmetic that signals an inconsistent state, e.g. positive-by-zero division.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated an operation's contract (unassigned variable, decision mismatch, ...).
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// An enumeration or time budget was exhausted.
class CapExceeded : public std::runtime_error {
public:
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Instance has probability zero; classification is undefined.
class DegenerateInstance : public std::runtime_error {
public:
    explicit DegenerateInstance(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bnc
