#include "fpps/dataflow_model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fpps/error.hpp"

namespace fpps::dataflow {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::uint64_t ceil_log2(std::uint64_t x) {
    std::uint64_t d = 0;
    while ((std::uint64_t{1} << d) < x) ++d;
    return d;
}

void check_request(const PipelineGeometry& g, std::uint64_t n_source, std::uint64_t n_target,
                   const ModelCoefficients& k) {
    g.validate();
    if (k.target_bank_depth == 0 || k.read_cycles_per_source == 0 ||
        k.accumulate_cycles_per_result == 0 || k.cycles_per_tree_level == 0) {
        throw ConfigError("model coefficients must all be at least 1");
    }
    if (n_source == 0 || n_target == 0) {
        throw ConfigError("n_source and n_target must be at least 1");
    }
    const std::uint64_t capacity = target_capacity(g, k);
    if (n_target > capacity) throw CapacityExceededError(n_target, capacity);
}

void finish(PipelineEstimate& e, const PipelineGeometry& g, std::uint64_t n_source,
            std::uint64_t core) {
    e.total_cycles = 2 * g.fifo_depth + core;
    e.steady_state_throughput = static_cast<double>(n_source) / static_cast<double>(core);
    e.latency_ms = static_cast<double>(e.total_cycles) / (g.clock_mhz * 1e3);
}

}  // namespace

void PipelineGeometry::validate() const {
    if (pe_rows < 1 || pe_cols < 1 || fifo_depth < 1 || read_width < 1) {
        throw ConfigError("pipeline geometry fields must all be at least 1");
    }
    if (!(clock_mhz > 0.0) || !std::isfinite(clock_mhz)) {
        throw ConfigError("clock_mhz must be positive");
    }
}

std::uint64_t target_capacity(const PipelineGeometry& g, const ModelCoefficients& k) {
    return g.pe_cols * g.read_width * k.target_bank_depth;
}

std::uint64_t StageCycles::max() const { return std::max({read, distance, compare, accumulate}); }

PipelineEstimate estimate_pipeline(const PipelineGeometry& g, std::uint64_t n_source,
                                   std::uint64_t n_target, const ModelCoefficients& k) {
    check_request(g, n_source, n_target, k);

    PipelineEstimate e;
    e.batches = ceil_div(n_source, g.pe_rows);
    const std::uint64_t slots = ceil_div(n_target, g.read_width);
    e.beats_per_batch = ceil_div(slots, g.pe_cols);
    e.active_lanes = ceil_div(slots, e.beats_per_batch);
    e.tree_depth = ceil_log2(e.active_lanes);

    e.per_stage.read = n_source * k.read_cycles_per_source;
    e.per_stage.distance = e.batches * e.beats_per_batch;
    e.per_stage.compare = e.batches * e.tree_depth * k.cycles_per_tree_level;
    e.per_stage.accumulate = n_source * k.accumulate_cycles_per_result;

    // Tree drain for a batch is serialised with that batch's beats.
    const std::uint64_t core = std::max({e.per_stage.read, e.per_stage.distance + e.per_stage.compare,
                                         e.per_stage.accumulate});
    finish(e, g, n_source, core);
    return e;
}

PipelineWalk simulate_pipeline(const PipelineGeometry& g, std::uint64_t n_source,
                               std::uint64_t n_target, const ModelCoefficients& k) {
    check_request(g, n_source, n_target, k);

    // Smallest beat count whose broadcast covers the target, then pack lanes
    // front to back with that many beats' worth of points each.
    std::uint64_t beats = 1;
    while (g.pe_cols * g.read_width * beats < n_target) ++beats;
    std::vector<std::uint64_t> lane_points;
    for (std::uint64_t left = n_target; left > 0 && lane_points.size() < g.pe_cols;) {
        const std::uint64_t take = std::min(left, beats * g.read_width);
        lane_points.push_back(take);
        left -= take;
    }
    std::uint64_t levels = 0;
    for (std::uint64_t m = lane_points.size(); m > 1; m = (m + 1) / 2) ++levels;
    const std::uint64_t tree_cycles = levels * k.cycles_per_tree_level;

    PipelineWalk walk;

    // Read engine.
    std::uint64_t read_done = 0, read_phase = 0;
    // Distance/compare engine.
    std::uint64_t batch_start = 0, beat = 0, tree_left = 0, batches = 0;
    bool in_tree = false;
    // Accumulate engine.
    std::uint64_t acc_done = 0, acc_phase = 0;

    for (;;) {
        bool busy = false;

        if (read_done < n_source) {
            busy = true;
            ++walk.estimate.per_stage.read;
            if (++read_phase == k.read_cycles_per_source) {
                read_phase = 0;
                ++read_done;
            }
        }

        if (batch_start < n_source) {
            busy = true;
            const std::uint64_t rows = std::min(g.pe_rows, n_source - batch_start);
            if (!in_tree) {
                ++walk.estimate.per_stage.distance;
                for (std::uint64_t pts : lane_points) {
                    const std::uint64_t sent = beat * g.read_width;
                    if (sent < pts) walk.pairs_evaluated += rows * std::min(g.read_width, pts - sent);
                }
                if (++beat == beats) {
                    beat = 0;
                    in_tree = tree_cycles > 0;
                    tree_left = tree_cycles;
                    if (!in_tree) {
                        batch_start += rows;
                        ++batches;
                    }
                }
            } else {
                ++walk.estimate.per_stage.compare;
                if (--tree_left == 0) {
                    in_tree = false;
                    batch_start += rows;
                    ++batches;
                }
            }
        }

        if (acc_done < n_source) {
            busy = true;
            ++walk.estimate.per_stage.accumulate;
            if (++acc_phase == k.accumulate_cycles_per_result) {
                acc_phase = 0;
                ++acc_done;
            }
        }

        if (!busy) break;
        ++walk.busy_cycles;
    }

    walk.estimate.batches = batches;
    walk.estimate.beats_per_batch = beats;
    walk.estimate.active_lanes = lane_points.size();
    walk.estimate.tree_depth = levels;
    finish(walk.estimate, g, n_source, walk.busy_cycles);
    return walk;
}

}  // namespace fpps::dataflow
