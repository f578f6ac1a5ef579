#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fpps/geometry.hpp"

namespace fpps::cli {

enum class Format { text, csv, json };

Format parse_format(const std::string& name);

struct FrameRecord {
    long frame = 0;              // index of the source frame of the pair
    double rmse_m = 0.0;
    double latency_ms = 0.0;     // align() wall time only
    double io_ms = 0.0;          // file loading, reported with --include-io
    std::size_t iterations = 0;
    bool converged = false;
    RigidTransform transform;    // estimated source -> target motion
    std::optional<double> gt_trans_err_m;
    std::optional<double> gt_rot_err_rad;
};

/// Per-frame results for one backend plus aggregates derived from them.
struct BenchReport {
    std::string backend;
    std::vector<FrameRecord> records;
    bool include_io = false;
    bool omit_timing = false;

    double average_rmse() const;
    double average_latency_ms() const;
    /// Only when every record carries ground-truth errors.
    std::optional<double> average_gt_trans_err() const;
    std::optional<double> average_gt_rot_err() const;

    /// Baseline used for `speedup`, when one was attached.
    std::optional<std::string> baseline;
    std::optional<double> speedup;
};

/// baseline average latency / this report's average latency. Throws
/// fpps::Error when either average is not positive.
double speedup(const BenchReport& baseline, const BenchReport& run);

/// CSV header: frame,rmse_m,latency_ms,iterations,converged
void write_csv(std::ostream& os, const BenchReport& report);
void write_text(std::ostream& os, const BenchReport& report);
void write_json(std::ostream& os, const BenchReport& report);

/// Shortest round-trip decimal form of a double.
std::string format_real(double v);

}  // namespace fpps::cli
