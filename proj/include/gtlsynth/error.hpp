#pragma once

#include <stdexcept>
#include <string>

namespace gtlsynth {

enum class ErrorCode {
    ok = 0,
    schema = 1,
    stochasticity = 2,
    index = 3,
    parse = 4,
    horizon = 5,
    unbounded = 6,
    state_cap = 7,
    infeasible = 8,
    solver = 9,
    kernel_form = 10,
    argument = 11,
    io = 12,
    escape = 13,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// parse errors carry a 1-based column
class ParseError : public Error {
public:
    ParseError(int column, const std::string& msg)
        : Error(ErrorCode::parse, "at position " + std::to_string(column) + ": " + msg), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

} // namespace gtlsynth
