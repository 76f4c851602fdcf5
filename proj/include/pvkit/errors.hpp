#pragma once

#include <stdexcept>
#include <string>

namespace pvkit {

// Exceptions cover caller errors (violated preconditions, bad local state).
// Protocol-level failures are values; see RejectReason in wire.hpp.

struct InvalidKdfInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PlaintextTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DuplicateRegistration : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct UnknownPassport : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotProvisioned : std::logic_error {
    using std::logic_error::logic_error;
};

struct UnknownVisa : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct LocallyExpired : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioParseError : std::runtime_error {
    ScenarioParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_no(line) {}
    std::size_t line_no;
};

struct FreshnessViolation : std::runtime_error {
    FreshnessViolation(std::size_t a, std::size_t b, const std::string& what)
        : std::runtime_error(what), first_session(a), second_session(b) {}
    std::size_t first_session;
    std::size_t second_session;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace pvkit
