#pragma once

#include <stdexcept>
#include <string>

namespace gridflow {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---- flow network ----
class UnknownNode : public Error {
public:
    using Error::Error;
};

class UnknownEdge : public Error {
public:
    using Error::Error;
};

class CapacityExceeded : public Error {
public:
    using Error::Error;
};

// ---- case parsing ----
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class MissingSection : public ParseError {
public:
    using ParseError::ParseError;
};

class MalformedCard : public ParseError {
public:
    using ParseError::ParseError;
};

class DuplicateBusNumber : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownBusInBranch : public ParseError {
public:
    using ParseError::ParseError;
};

class NoSlackBus : public ParseError {
public:
    using ParseError::ParseError;
};

// ---- power flow ----
class ZeroImpedanceBranch : public Error {
public:
    using Error::Error;
};

class SingularJacobian : public Error {
public:
    using Error::Error;
};

class IslandedBus : public Error {
public:
    using Error::Error;
};

// ---- information network ----
class NoRoute : public Error {
public:
    using Error::Error;
};

// ---- payment network ----
class UnknownAccount : public Error {
public:
    using Error::Error;
};

class InsufficientFunds : public Error {
public:
    using Error::Error;
};

}  // namespace gridflow
