#pragma once

#include <stdexcept>
#include <string>

namespace ckb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: wrong shapes, bad files, invalid configs.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical routine produced or received values it cannot work with.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Every pairwise distance behind an adaptive bandwidth is zero.
class DegenerateBandwidth : public NumericalError {
public:
    DegenerateBandwidth() : NumericalError("degenerate bandwidth") {}
};

/// An estimator disagreed with its independent oracle.
class VerificationError : public Error {
public:
    using Error::Error;
};

} // namespace ckb
