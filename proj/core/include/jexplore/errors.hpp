#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jexplore {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value is not a member of its parameter grid. Carries the field name.
class MembershipError : public Error {
public:
    MembershipError(std::string field, const std::string& message)
        : Error(message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An index or numeric argument lies outside its admissible range.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A function argument violates its contract.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Frame body exceeds the wire size limit.
class FrameTooLargeError : public Error {
public:
    using Error::Error;
};

/// The byte stream ended in the middle of a frame.
class IncompleteFrameError : public Error {
public:
    using Error::Error;
};

/// A frame body is not valid JSON or not a well-formed envelope.
class ParseError : public Error {
public:
    using Error::Error;
};

/// An envelope violates protocol rules (unknown type, bad version, seq skew).
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// A CSV header does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A CSV row failed to parse. Carries the 1-based line number.
class RowError : public Error {
public:
    RowError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Too few records for the requested computation.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// The operation is specified but intentionally not implemented here.
class NotImplementedError : public Error {
public:
    using Error::Error;
};

/// A socket or file operation failed.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace jexplore
