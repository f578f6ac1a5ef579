#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fpps {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A RigidTransform failed the SO(3) membership check.
class InvalidTransformError : public Error {
public:
    using Error::Error;
};

class EmptyCloudError : public Error {
public:
    using Error::Error;
};

/// Target cloud larger than the configured nearest-neighbour capacity.
class CapacityExceededError : public Error {
public:
    CapacityExceededError(std::size_t requested, std::size_t capacity);

    std::size_t requested() const noexcept { return requested_; }
    std::size_t capacity() const noexcept { return capacity_; }

private:
    std::size_t requested_;
    std::size_t capacity_;
};

/// Fewer than three correspondences survived distance gating.
///
/// `iteration()` is 0 when raised outside of an ICP loop, otherwise the
/// 1-based iteration in which the gate emptied out.
class DegenerateCorrespondenceError : public Error {
public:
    DegenerateCorrespondenceError(std::size_t surviving, std::size_t iteration = 0);

    std::size_t surviving() const noexcept { return surviving_; }
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t surviving_;
    std::size_t iteration_;
};

/// Cross-covariance is rank deficient; rotation is not observable.
class DegenerateGeometryError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `location()` is a line number (text formats) or a
/// point index (binary formats); 0 when not applicable.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t location = 0);

    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

/// Warnings are routed through a process-wide sink (stderr by default).
using WarningSink = std::function<void(std::string_view)>;

/// Installs `sink` and returns the previous one. Passing an empty function
/// restores the stderr sink.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace fpps
