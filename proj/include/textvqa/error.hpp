#pragma once

#include <stdexcept>
#include <string>

namespace textvqa {

/// Base error. `kind` is a short machine-readable tag surfaced by the CLI
/// ("validation", "io", "shape", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// A dataset/config record failed validation. Carries the 1-based line (0 when
/// not file-backed) and the offending field name.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message, std::size_t line = 0)
        : Error("validation", decorate(field, message, line)), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string decorate(const std::string& field, const std::string& message, std::size_t line) {
        std::string out;
        if (line) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += "field '" + field + "': ";
        return out + message;
    }

    std::string field_;
    std::size_t line_;
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io", message) {}
};

}  // namespace textvqa
