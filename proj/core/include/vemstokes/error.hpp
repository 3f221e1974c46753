#pragma once

#include <stdexcept>
#include <string>

namespace vemstokes {

/// Failure category; the CLI maps each one to a distinct exit code.
enum class ErrorKind { Config, Mesh, Assembly, Solver, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class MeshError : public Error {
public:
    explicit MeshError(const std::string& what) : Error(ErrorKind::Mesh, what) {}
};

class AssemblyError : public Error {
public:
    explicit AssemblyError(const std::string& what) : Error(ErrorKind::Assembly, what) {}
};

class SolverError : public Error {
public:
    explicit SolverError(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

const char* to_string(ErrorKind kind) noexcept;

} // namespace vemstokes
