#pragma once

#include <stdexcept>
#include <string>

namespace ign {

// Base for every error raised by the library. Subclasses map onto the CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Caller broke an operation's precondition (e.g. backward on a non-scalar root).
class ContractError : public Error {
public:
    using Error::Error;
};

// Second-order differentiation requested through an op that does not support it.
class CapabilityError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class IncompatibleArtifactError : public Error {
public:
    using Error::Error;
};

class InfeasibleError : public Error {
public:
    using Error::Error;
};

}  // namespace ign
