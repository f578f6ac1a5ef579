#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fpps/dataflow_model.hpp"
#include "fpps/error.hpp"
#include "fpps/registration.hpp"
#include "fpps_cli/report.hpp"

namespace fpps::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitNotConverged = 2 };

/// Settings shared by register, bench and compare.
struct RunOptions {
    IcpConfig icp;
    /// Source points sampled per frame; 0 disables sampling.
    std::size_t sample_n = 4096;
    std::uint64_t seed = 42;
    /// After the sampled pass, refine with the full source cloud.
    bool two_stage = false;
    /// Frames read by bench and compare, from the first; 0 reads all.
    std::size_t max_frames = 0;
    bool include_io = false;
    /// Report zero latencies so machine-readable output is reproducible.
    bool omit_timing = false;
};

struct RegisterOutcome {
    IcpResult result;
    double latency_ms = 0.0;
    double io_ms = 0.0;
};

/// Loads both clouds (".bin" or ".xyz"), samples the source if requested and
/// aligns it to the target.
RegisterOutcome run_register(const fs::path& source, const fs::path& target, const RunOptions& opts);

/// Numbered ".bin" frames of a sequence directory, sorted by frame index.
std::vector<std::pair<long, fs::path>> list_frames(const fs::path& seq_dir);

/// Aligns every consecutive frame pair (k, k+1): the sampled frame k+1 is the
/// source, frame k the target. With poses, each record also carries the error
/// of the estimate against ground truth. Unreadable or non-consecutive frames
/// are skipped with a warning.
BenchReport run_bench(const fs::path& seq_dir, const std::optional<fs::path>& poses,
                      const RunOptions& opts);

/// Registration results differ between two backends.
class EquivalenceError : public Error {
public:
    EquivalenceError(const std::string& backend_a, const std::string& backend_b, long frame,
                     const std::string& field);

    long frame() const noexcept { return frame_; }
    const std::string& field() const noexcept { return field_; }

private:
    long frame_;
    std::string field_;
};

struct SpeedupEntry {
    std::string baseline;
    std::string backend;
    double speedup;
};

struct CompareReport {
    std::vector<BenchReport> runs;
    std::vector<SpeedupEntry> speedups;
};

/// Maximum absolute difference tolerated between backends' transforms and RMSE.
inline constexpr double kEquivalenceTolerance = 1e-12;

/// Throws EquivalenceError naming the first differing frame and field.
void check_equivalent(const BenchReport& a, const BenchReport& b);

/// Runs the benchmark once per backend and checks the results agree before
/// any speedup is computed. The baseline is "naive" when present, otherwise
/// the first backend. Needs at least two distinct backends (ConfigError).
CompareReport run_compare(const fs::path& seq_dir, const std::vector<nn::Backend>& backends,
                          const RunOptions& opts);

void write_compare(std::ostream& os, const CompareReport& report, Format format);
void write_register(std::ostream& os, const RegisterOutcome& outcome, Format format,
                    const RunOptions& opts);

/// Geometry from JSON: either the fields at top level or under "geometry";
/// optional "coefficients" object. Throws ConfigError.
struct ModelConfig {
    dataflow::PipelineGeometry geometry;
    dataflow::ModelCoefficients coefficients;
};
ModelConfig read_model_config(const fs::path& path);
ModelConfig parse_model_config(const std::string& json_text);

/// "field=v1,v2,..." over pe_rows, pe_cols, fifo_depth, read_width or clock_mhz.
struct Sweep {
    std::string field;
    std::vector<double> values;
};
Sweep parse_sweep(const std::string& text);

void write_model(std::ostream& os, const dataflow::PipelineEstimate& e,
                 const dataflow::PipelineGeometry& g, std::uint64_t n_source,
                 std::uint64_t n_target, Format format);
/// CSV: value,total_cycles,read,distance,compare,accumulate,latency_ms,throughput
void write_sweep(std::ostream& os, const ModelConfig& base, const Sweep& sweep,
                 std::uint64_t n_source, std::uint64_t n_target);

/// Parses `args` (without the program name), runs the subcommand and returns
/// the process exit code. Errors are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpps::cli
