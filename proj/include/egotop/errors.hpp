#pragma once

#include <stdexcept>
#include <string>

namespace egotop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A trajectory never moves faster than the heading threshold.
class AllStationary : public Error {
public:
    using Error::Error;
};

/// Trajectories (or streams) that must share a frame count do not.
class MismatchedLengths : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// The requested correlation offset leaves too little overlap.
class InsufficientOverlap : public Error {
public:
    using Error::Error;
};

/// Spectral matching was handed an all-zero affinity.
class ZeroMatrix : public Error {
public:
    using Error::Error;
};

class InfeasibleMotion : public Error {
public:
    using Error::Error;
};

/// Malformed configuration, file content or argument.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace egotop
