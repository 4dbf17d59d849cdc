#pragma once
// Error hierarchy shared by all modules. The CLI maps these onto exit codes.

#include <stdexcept>
#include <string>

namespace rctgan {

// Malformed / inconsistent input data (CSV, schema, checkpoint contents).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A loss turned NaN/Inf or a numeric contract broke mid-training.
struct TrainingDiverged : std::runtime_error {
    explicit TrainingDiverged(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble: unreadable input, unwritable output.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rctgan
