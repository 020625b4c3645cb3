#pragma once

#include <stdexcept>
#include <string>

namespace convogen {

// Base for everything the toolkit throws; catch this at CLI level.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Agent file could not be read or decoded. Carries a line/field locus in the message.
struct ParseError : Error {
    using Error::Error;
};

// Agent model violates an invariant; message names the offending element.
struct ValidationError : Error {
    using Error::Error;
};

// Convo file is malformed at a given line.
struct FormatError : Error {
    int line;
    FormatError(int line_, const std::string& what_)
        : Error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

struct MissingFill : Error {
    std::string parameter;
    explicit MissingFill(const std::string& param)
        : Error("no fill for slot '" + param + "'"), parameter(param) {}
};

struct SessionClosed : Error {
    SessionClosed() : Error("session is closed") {}
};

struct DuplicateHandler : Error {
    explicit DuplicateHandler(const std::string& id)
        : Error("action handler '" + id + "' already registered"), handler_id(id) {}
    std::string handler_id;
};

struct UnknownAction : Error {
    explicit UnknownAction(const std::string& id)
        : Error("no action handler registered for '" + id + "'") {}
};

// A seed convo step does not correspond to any intent of the agent.
struct UnknownIntent : Error {
    explicit UnknownIntent(const std::string& text)
        : Error("no intent owns the message: \"" + text + "\"") {}
};

struct ConnectError : Error {
    using Error::Error;
};

// A trace references an intent or entity the agent does not define.
struct UnknownAgentElement : Error {
    using Error::Error;
};

// A test supplied to the mutation scorer is not correct on the original agent.
struct BaselineUnstable : Error {
    explicit BaselineUnstable(const std::string& test)
        : Error("test '" + test + "' is not correct on the original agent"), test_name(test) {}
    std::string test_name;
};

}  // namespace convogen
