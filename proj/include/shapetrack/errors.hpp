#pragma once

#include <stdexcept>
#include <string>

namespace shapetrack {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Point set is collinear, empty, or otherwise unusable for the requested primitive.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// A contour radius was zero or negative where a positive length is required.
class NonPositiveRadius : public Error {
public:
    using Error::Error;
};

/// A configuration value violates its documented range.
class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// The GP gram matrix could not be factorized even with jitter.
class SingularGram : public Error {
public:
    using Error::Error;
};

/// A contour estimate cannot be turned into a usable polygon.
class DegenerateContour : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Levenberg-Marquardt damping exceeded its ceiling without an acceptable step.
class SingularNormalEquations : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class NonFiniteLikelihood : public Error {
public:
    using Error::Error;
};

/// File / schema problems in serialized artifacts; message carries the line number.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace shapetrack
