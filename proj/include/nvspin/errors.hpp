#pragma once

#include <stdexcept>
#include <string>

namespace nvspin {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A value handed to a builder or operation violates its preconditions.
struct invalid_input_error : error {
    using error::error;
};

// Settings that make a computation impossible (step-size underflow, bad grids).
struct config_error : error {
    using error::error;
};

// pi/2 calibration found no population crossing.
struct calibration_error : error {
    using error::error;
};

// No qualifying minimum in a trace.
struct detection_error : error {
    using error::error;
};

// A spectral component needed for polarization inference is absent.
struct inference_error : error {
    using error::error;
};

// A file or directory could not be created, opened, read or written.
struct io_error : error {
    using error::error;
};

} // namespace nvspin
