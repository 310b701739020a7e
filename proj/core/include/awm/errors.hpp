#pragma once

#include <stdexcept>
#include <string>

namespace awm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char *kind() const noexcept { return "error"; }
};

/// A value does not fit the bit width or address range of its field.
class RangeError : public Error {
public:
    RangeError(std::string field, const std::string &what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string &field() const noexcept { return field_; }
    const char *kind() const noexcept override { return "range"; }

private:
    std::string field_;
};

/// A table or word has no room left for another entry.
class CapacityError : public Error {
public:
    CapacityError(std::string table, const std::string &what)
        : Error(table + ": " + what), table_(std::move(table)) {}
    const std::string &table() const noexcept { return table_; }
    const char *kind() const noexcept override { return "capacity"; }

private:
    std::string table_;
};

/// Malformed binary word or stream.
class FormatError : public Error {
public:
    using Error::Error;
    const char *kind() const noexcept override { return "format"; }
};

/// Reference to something that was never defined or programmed.
class LookupError : public Error {
public:
    using Error::Error;
    const char *kind() const noexcept override { return "lookup"; }
};

/// Invalid model, run or input-file configuration.
class ConfigError : public Error {
public:
    using Error::Error;
    const char *kind() const noexcept override { return "config"; }
};

} // namespace awm
