#pragma once

#include <stdexcept>
#include <string>

namespace hid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameterError : public Error {
public:
    using Error::Error;
};

class ShapeMismatchError : public Error {
public:
    using Error::Error;
};

/// A condition selected no dataset image.
class NoMatchingConditionError : public Error {
public:
    using Error::Error;
};

/// Projection onto an all-zero reference vector.
class DegenerateReferenceError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hid
