#pragma once

#include <stdexcept>
#include <string>

namespace weaktrace {

// Base for every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad caller input: negative widths, out-of-range stages, malformed grids.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A stage or measurement was applied where the circuit layout does not allow it.
class MalformedPipeline : public Error {
public:
    using Error::Error;
};

// Postselection has zero probability, so no conditional pointer statistics exist.
class NoPostselectedEvents : public Error {
public:
    using Error::Error;
};

// <f|in> vanishes for the requested pre/post pair.
class UndefinedWeakValue : public Error {
public:
    using Error::Error;
};

}  // namespace weaktrace
