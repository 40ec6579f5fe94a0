#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spatial3d {

/// Precondition violated by the caller (bad shape, empty input, out-of-range value).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A forward or backward computation produced a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Token grammar violation. `position()` is the byte offset where parsing failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position)
        : std::runtime_error(message + " at byte " + std::to_string(position)),
          position_(position)
    {
    }

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

} // namespace spatial3d
