#pragma once

#include <stdexcept>
#include <string>

namespace edgebench {

// Base for every error the library throws. The CLI maps these to exit codes;
// everything else (std::bad_alloc etc.) is a bug.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed document (not even parseable). Line/column are 1-based.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, int line, int column)
        : Error(msg + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Structurally parseable but violates the document schema. `path` points at
// the offending node, e.g. "experiments[0].workloads[0].name".
class SchemaError : public Error {
public:
    SchemaError(const std::string& msg, std::string path)
        : Error(path.empty() ? msg : path + ": " + msg), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class UnknownWorkload : public Error {
public:
    explicit UnknownWorkload(const std::string& name)
        : Error("unknown workload kind: " + name) {}
};

class ParameterError : public Error {
public:
    ParameterError(const std::string& msg, std::string path)
        : Error(path.empty() ? msg : path + ": " + msg), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class PlacementError : public Error {
public:
    using Error::Error;
};

class DuplicateDeployment : public Error {
public:
    explicit DuplicateDeployment(const std::string& instance_id)
        : Error("deployment already live: " + instance_id) {}
};

class ConnectorError : public Error {
public:
    using Error::Error;
};

class MetricParseError : public Error {
public:
    using Error::Error;
};

class ScrapeError : public Error {
public:
    using Error::Error;
};

class UnknownKey : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class EmptySeries : public Error {
public:
    EmptySeries() : Error("mean of empty series") {}
};

class ZeroThroughput : public Error {
public:
    ZeroThroughput() : Error("throughput must be > 0") {}
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class MissingMetric : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace edgebench
