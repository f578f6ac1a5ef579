#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fpps/geometry.hpp"

namespace fpps::nn {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// Nearest target point for one source point.
struct NnResult {
    std::size_t source_index = 0;
    std::size_t target_index = kNoIndex;
    double squared_distance = std::numeric_limits<double>::infinity();

    friend bool operator==(const NnResult&, const NnResult&) = default;
};

/// Shape of the tiled search kernel. Tiling only affects speed; every valid
/// configuration produces identical results.
struct TileConfig {
    /// Source points held in the local register buffer per batch.
    std::size_t source_tile_size = 256;
    /// Parallel target lanes, each with its own running-minimum registers.
    std::size_t target_partitions = 16;
    /// Largest target cloud the kernel accepts.
    std::size_t target_capacity = 131072;
    /// Worker threads over source tiles; 0 picks the hardware concurrency.
    unsigned workers = 0;

    /// Throws ConfigError on a zero tile size, partition count or capacity.
    void validate() const;

    friend bool operator==(const TileConfig&, const TileConfig&) = default;
};

/// Squared Euclidean distance accumulated as dx² + dy² + dz², left to right.
/// Every search path uses this exact expression so results are bit-identical.
inline double squared_distance(const Point3& target, const Point3& query) {
    const double dx = target.x - query.x;
    const double dy = target.y - query.y;
    const double dz = target.z - query.z;
    return dx * dx + dy * dy + dz * dz;
}

/// True when (d, idx) beats the current best under the shared tie rule:
/// strictly smaller distance, or equal distance and smaller target index.
inline bool improves(double d, std::size_t idx, double best_d, std::size_t best_idx) {
    return d < best_d || (d == best_d && idx < best_idx);
}

/// Exact nearest neighbour for every source point, in source order.
///
/// The kernel mirrors a four-stage streaming design: each worker loads a batch
/// of `source_tile_size` source points, streams the target cloud through
/// `target_partitions` lanes of contiguous target indices while each lane keeps
/// a running (distance, index) minimum per source point, reduces the lanes
/// with a binary comparison tree, then writes the batch out.
///
/// Throws EmptyCloudError, CapacityExceededError or ConfigError.
std::vector<NnResult> brute_force_nn(const PointCloud& source, const PointCloud& target,
                                     const TileConfig& cfg = {});

/// One running-minimum register observation from the instrumented kernel.
struct LaneEvent {
    std::size_t source_index;
    std::size_t lane;
    std::size_t target_index;  // point that was just streamed through the lane
    double running_min;        // lane minimum after considering it
};

using LaneObserver = std::function<void(const LaneEvent&)>;

/// Same kernel as brute_force_nn, single-threaded, reporting every lane
/// register update to `observer`. Intended for tests and diagnostics.
std::vector<NnResult> brute_force_nn_traced(const PointCloud& source, const PointCloud& target,
                                            const TileConfig& cfg, const LaneObserver& observer);

/// Single-threaded double loop over every (source, target) pair.
std::vector<NnResult> naive_nn(const PointCloud& source, const PointCloud& target);

enum class Backend { parallel, naive, kdtree };

std::string_view to_string(Backend backend);
/// Accepts "parallel", "naive" or "kdtree"; throws ConfigError otherwise.
Backend parse_backend(std::string_view name);
/// Reads FPPS_BACKEND, falling back to `fallback` when it is unset or empty.
Backend backend_from_environment(Backend fallback = Backend::parallel);

class KdTree;

/// A target cloud prepared for repeated queries by one backend. The k-d tree
/// backend builds its index once here; the brute-force backends keep a copy.
class NnSearcher {
public:
    NnSearcher(PointCloud target, Backend backend, TileConfig tile = {});
    ~NnSearcher();
    NnSearcher(NnSearcher&&) noexcept;
    NnSearcher& operator=(NnSearcher&&) noexcept;

    std::vector<NnResult> search(const PointCloud& source) const;

    Backend backend() const noexcept { return backend_; }
    const PointCloud& target() const noexcept { return target_; }

private:
    PointCloud target_;
    Backend backend_;
    TileConfig tile_;
    std::unique_ptr<KdTree> tree_;
};

}  // namespace fpps::nn
