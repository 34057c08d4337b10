#ifndef MEDZISC_ERRORS_HPP
#define MEDZISC_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace medzisc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative scale, proportion at 0 or 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inputs disagree on shape or identity: mismatched gene lists, missing subjects, ragged tables.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Malformed text input (TSV/JSON) or an invalid configuration value.
class InputError : public Error {
public:
    InputError(std::string field, const std::string& message)
        : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class SingularDesignError : public Error {
public:
    SingularDesignError(std::vector<std::string> columns, const std::string& message)
        : Error(message), columns_(std::move(columns)) {}

    /// Columns that are linear combinations of earlier columns.
    const std::vector<std::string>& columns() const { return columns_; }

private:
    std::vector<std::string> columns_;
};

class DegenerateResponseError : public Error {
public:
    using Error::Error;
};

}  // namespace medzisc

#endif  // MEDZISC_ERRORS_HPP
