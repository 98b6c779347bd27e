#pragma once

#include <stdexcept>
#include <string>

namespace wtb {

// Root of every error this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidActionError : public Error {
public:
    using Error::Error;
};

// Bad constructor/operation arguments (K too small, delta outside (0,1), ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A brute-force or DP routine would exceed its configured budget.
class CapacityError : public Error {
public:
    using Error::Error;
};

// Sequence lengths that must agree do not.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace wtb
