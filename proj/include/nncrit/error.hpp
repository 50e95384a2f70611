#pragma once

#include <stdexcept>
#include <string>

namespace nncrit {

// Base of every error thrown by the library. The CLI maps the concrete type
// to an exit code, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

// Sample point outside the family's support, or a malformed argument size.
class DomainError : public Error {
public:
    using Error::Error;
};

// Operation requested from a family that lacks the needed capability flag.
class CapabilityError : public Error {
public:
    using Error::Error;
};

class LineSearchFailure : public Error {
public:
    using Error::Error;
};

class NonFiniteObjective : public Error {
public:
    using Error::Error;
};

class NoiseDensityZero : public Error {
public:
    using Error::Error;
};

class EmptyFold : public Error {
public:
    using Error::Error;
};

class DegenerateComponent : public Error {
public:
    using Error::Error;
};

class QuadratureNonConvergence : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace nncrit
