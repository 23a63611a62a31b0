#pragma once

#include <stdexcept>
#include <string>

namespace gtnav {

/// Invalid argument values (non-finite inputs, out-of-range parameters).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed input file. Carries the 1-based line number when known.
struct ParseError : std::runtime_error {
    int line = 0;
    ParseError(const std::string& msg, int line_no = 0)
        : std::runtime_error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
};

/// Invalid or inconsistent scenario/manifest configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A metric that is undefined for the given trajectory (too few samples, zero length).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Statistical input on which the requested test is degenerate (e.g. all values tied).
struct DegenerateDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gtnav
