#pragma once

#include <stdexcept>
#include <string>

namespace fcmon {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong" catch this; the subclasses name the contract
// that was violated.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error("parse error at row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class IncompletePanel : public Error {
public:
    IncompletePanel(long tick, const std::string& stream)
        : Error("incomplete panel: missing tick " + std::to_string(tick) + " for stream '" + stream + "'"),
          tick_(tick), stream_(stream) {}
    long tick() const noexcept { return tick_; }
    const std::string& stream() const noexcept { return stream_; }

private:
    long tick_;
    std::string stream_;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& field, const std::string& what)
        : Error("config error [" + field + "]: " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct InsufficientHistory : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct InsufficientSample : Error { using Error::Error; };
struct InvalidLag : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct NotWarmedUp : Error { using Error::Error; };
struct AlreadyWarm : Error { using Error::Error; };
struct EmptyLog : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };
struct LeakageError : Error { using Error::Error; };

}  // namespace fcmon
