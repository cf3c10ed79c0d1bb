#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nbsim {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidWeights : public Error {
public:
    using Error::Error;
};

class MalformedDocument : public Error {
public:
    using Error::Error;
};

class EmptyNotebook : public Error {
public:
    using Error::Error;
};

class UnknownOutputType : public Error {
public:
    using Error::Error;
};

class TableLoadError : public Error {
public:
    TableLoadError(std::string path, const std::string& cause)
        : Error("cannot load table '" + path + "': " + cause), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class GraphConstructionError : public Error {
public:
    using Error::Error;
};

class CycleDetected : public Error {
public:
    explicit CycleDetected(std::vector<std::size_t> witness);

    /// Node ids along the cycle; the first node is repeated at the end.
    const std::vector<std::size_t>& witness() const noexcept { return witness_; }

private:
    std::vector<std::size_t> witness_;
};

class InvalidQuery : public Error {
public:
    using Error::Error;
};

class EmptyCorpus : public Error {
public:
    EmptyCorpus() : Error("corpus is empty") {}
};

class IoError : public Error {
public:
    using Error::Error;
};

class VersionMismatch : public Error {
public:
    VersionMismatch(int found, int supported)
        : Error("corpus format version " + std::to_string(found) + " is not supported (expected " +
                std::to_string(supported) + ")") {}
};

class CorruptGraph : public Error {
public:
    CorruptGraph(std::string id, const std::string& cause)
        : Error("corrupt graph '" + id + "': " + cause), id_(std::move(id)) {}

    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

}  // namespace nbsim
