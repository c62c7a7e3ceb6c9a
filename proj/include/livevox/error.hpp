#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace livevox {

/// Broad failure category; the CLI maps each to a distinct exit code.
enum class ErrorKind {
    input,       // unreadable/malformed files, bad parameters, rate or length mismatch
    separator,   // separator subprocess failed, timed out or broke its output contract
    degenerate,  // signals carry no usable evidence (e.g. silent stems)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

[[noreturn]] inline void fail_input(const std::string& what) { fail(ErrorKind::input, what); }

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::input: return "input";
        case ErrorKind::separator: return "separator";
        case ErrorKind::degenerate: return "degenerate";
    }
    return "unknown";
}

}  // namespace livevox
