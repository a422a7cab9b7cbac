#pragma once

#include <stdexcept>
#include <string>

namespace mitodet {

// Invalid caller input: bad arguments, malformed files, broken invariants at
// API boundaries. Maps to exit code 2 at the CLI / MDT_ERR_BAD_INPUT in the
// C API. Everything else that escapes is an internal error (exit code 3).
class BadInput : public std::runtime_error {
public:
    explicit BadInput(const std::string& what) : std::runtime_error(what) {}
};

class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

// Warning sink for non-fatal conditions (clamped model outputs, empty
// foreground fallback, ...). Writes "warning: ..." to stderr.
void warn(const std::string& message);

}  // namespace mitodet
