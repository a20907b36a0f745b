#pragma once

#include <stdexcept>
#include <string>

namespace mrta {

// One concrete exception type per reportable condition so callers can catch
// exactly what they can handle.

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidLayout : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidEndpoint : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Unreachable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidAction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mrta
