#pragma once

#include <cstdint>

namespace fpps::dataflow {

/// Shape of the streaming nearest-neighbour pipeline.
///
/// Rows of the PE array hold one source point each (the source batch);
/// columns are target lanes that receive `read_width` target points per
/// beat from partitioned on-chip storage.
struct PipelineGeometry {
    std::uint64_t pe_rows = 1;
    std::uint64_t pe_cols = 16;
    std::uint64_t fifo_depth = 32;
    double clock_mhz = 250.0;
    std::uint64_t read_width = 1;

    /// Throws ConfigError when any field is below 1 or the clock is not positive.
    void validate() const;
};

/// Every cost coefficient of the model, kept together for recalibration.
struct ModelCoefficients {
    /// Target points each read lane's storage partition can hold.
    std::uint64_t target_bank_depth = 8192;
    /// Cycles to move one source point into the register buffer.
    std::uint64_t read_cycles_per_source = 1;
    /// Cycles for the accumulator to take one (source, neighbour) result.
    std::uint64_t accumulate_cycles_per_result = 1;
    /// Cycles per comparison-tree level.
    std::uint64_t cycles_per_tree_level = 1;
};

/// Largest target cloud the geometry can hold: pe_cols · read_width · bank depth.
std::uint64_t target_capacity(const PipelineGeometry& geometry, const ModelCoefficients& k = {});

struct StageCycles {
    std::uint64_t read = 0;
    std::uint64_t distance = 0;
    std::uint64_t compare = 0;
    std::uint64_t accumulate = 0;

    std::uint64_t max() const;
    friend bool operator==(const StageCycles&, const StageCycles&) = default;
};

struct PipelineEstimate {
    std::uint64_t total_cycles = 0;
    StageCycles per_stage;
    /// Source points per cycle once the pipeline is full.
    double steady_state_throughput = 0.0;
    /// total_cycles / (clock_mhz · 10³)
    double latency_ms = 0.0;

    std::uint64_t batches = 0;          // ceil(n_source / pe_rows)
    std::uint64_t beats_per_batch = 0;  // target broadcast beats per batch
    std::uint64_t active_lanes = 0;     // target lanes holding at least one point
    std::uint64_t tree_depth = 0;       // comparison-tree levels per batch
};

/// First-order cost of one nearest-neighbour pass.
///
/// Per batch the distance stage needs K = ceil(ceil(n_target / read_width) /
/// pe_cols) beats. The target is packed into ceil(slots / K) lanes, and the
/// comparison tree over those lanes takes ceil(log₂ lanes) levels that cannot
/// overlap the batch's beats. Reading and accumulation run one source point
/// at a time alongside. Stages overlap, so the core time is the slowest
/// stage, and filling plus draining the FIFOs adds fifo_depth cycles each.
///
/// Throws ConfigError for zero-sized inputs or an invalid geometry, and
/// CapacityExceededError when n_target exceeds target_capacity().
PipelineEstimate estimate_pipeline(const PipelineGeometry& geometry, std::uint64_t n_source,
                                   std::uint64_t n_target, const ModelCoefficients& k = {});

/// Result of walking the pipeline one cycle at a time.
struct PipelineWalk {
    PipelineEstimate estimate;
    /// Source/target distance evaluations performed across all beats.
    std::uint64_t pairs_evaluated = 0;
    /// Cycles in which at least one stage was busy (excludes fill/drain).
    std::uint64_t busy_cycles = 0;
};

/// Cycle-stepped simulation of the same model: stages advance one cycle at a
/// time, target points are packed into lanes and broadcast beat by beat, and
/// the comparison tree is reduced level by level. Agrees exactly with
/// estimate_pipeline and is meant for cross-checking and small what-ifs.
PipelineWalk simulate_pipeline(const PipelineGeometry& geometry, std::uint64_t n_source,
                               std::uint64_t n_target, const ModelCoefficients& k = {});

}  // namespace fpps::dataflow
