#pragma once

#include <stdexcept>
#include <string>

namespace affina {

// Error hierarchy. Every domain failure maps to one of these so the CLI can
// translate to exit codes (domain error -> 1, usage error -> 2).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& msg) : Error("format error: " + msg) {}
};

struct SizeError : Error {
    explicit SizeError(const std::string& msg) : Error("size error: " + msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct DatasetError : Error {
    explicit DatasetError(const std::string& msg) : Error("dataset error: " + msg) {}
};

}  // namespace affina
