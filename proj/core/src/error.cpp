#include "fpps/error.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace fpps {

CapacityExceededError::CapacityExceededError(std::size_t requested, std::size_t capacity)
    : Error("target cloud has " + std::to_string(requested) +
            " points, exceeding nearest-neighbour capacity " + std::to_string(capacity)),
      requested_(requested),
      capacity_(capacity) {}

namespace {

std::string degenerate_message(std::size_t surviving, std::size_t iteration) {
    std::string msg = "only " + std::to_string(surviving) +
                      " correspondences within the distance gate (need at least 3)";
    if (iteration > 0) {
        msg += " at iteration " + std::to_string(iteration);
    }
    return msg;
}

std::mutex g_sink_mutex;
WarningSink g_sink;

}  // namespace

DegenerateCorrespondenceError::DegenerateCorrespondenceError(std::size_t surviving,
                                                             std::size_t iteration)
    : Error(degenerate_message(surviving, iteration)),
      surviving_(surviving),
      iteration_(iteration) {}

FormatError::FormatError(const std::string& what, std::size_t location)
    : Error(what), location_(location) {}

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(g_sink_mutex);
    return std::exchange(g_sink, std::move(sink));
}

void warn(std::string_view message) {
    std::lock_guard lock(g_sink_mutex);
    if (g_sink) {
        g_sink(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

}  // namespace fpps
