#include "fpps/nn_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>

#include "fpps/error.hpp"
#include "fpps/kdtree.hpp"

namespace fpps::nn {

void TileConfig::validate() const {
    if (source_tile_size == 0) throw ConfigError("source_tile_size must be at least 1");
    if (target_partitions == 0) throw ConfigError("target_partitions must be at least 1");
    if (target_capacity == 0) throw ConfigError("target_capacity must be at least 1");
}

namespace {

void check_inputs(const PointCloud& source, const PointCloud& target) {
    if (source.empty()) throw EmptyCloudError("source cloud is empty");
    if (target.empty()) throw EmptyCloudError("target cloud is empty");
}

// Target coordinates in structure-of-arrays form. Lane l streams the
// contiguous index range [lane_begin[l], lane_begin[l + 1]).
struct PartitionedTarget {
    std::vector<double> x, y, z;
    std::vector<std::size_t> lane_begin;

    PartitionedTarget(const PointCloud& target, std::size_t partitions) {
        const std::size_t n = target.size();
        x.resize(n);
        y.resize(n);
        z.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = target[i].x;
            y[i] = target[i].y;
            z[i] = target[i].z;
        }
        lane_begin.resize(partitions + 1);
        for (std::size_t l = 0; l <= partitions; ++l) lane_begin[l] = l * n / partitions;
    }

    std::size_t lanes() const { return lane_begin.size() - 1; }
};

struct NullObserver {
    static constexpr bool enabled = false;
    void operator()(const LaneEvent&) const {}
};

struct ForwardingObserver {
    static constexpr bool enabled = true;
    const LaneObserver* fn;
    void operator()(const LaneEvent& e) const { (*fn)(e); }
};

// Per-worker scratch: the source register buffer and one (min distance,
// candidate) register pair per (lane, source slot).
struct TileScratch {
    std::vector<double> sx, sy, sz;
    std::vector<double> best_d;
    std::vector<std::uint64_t> best_i;

    TileScratch(std::size_t tile, std::size_t lanes)
        : sx(tile), sy(tile), sz(tile), best_d(tile * lanes), best_i(tile * lanes) {}
};

template <class Observer>
void process_tile(const PointCloud& source, const PartitionedTarget& target, std::size_t tile_begin,
                  std::size_t tile_len, TileScratch& scratch, std::vector<NnResult>& out,
                  const Observer& observer) {
    const std::size_t lanes = target.lanes();
    const std::size_t stride = scratch.sx.size();

    // Stage 1: fill the source register buffer.
    for (std::size_t s = 0; s < tile_len; ++s) {
        const Point3& p = source[tile_begin + s];
        scratch.sx[s] = p.x;
        scratch.sy[s] = p.y;
        scratch.sz[s] = p.z;
    }

    // Stage 2: stream every lane's targets past the whole batch. Each slot
    // keeps a MIN register that only moves on a strictly smaller distance, so
    // within a lane the first (lowest-index) of equal candidates is kept.
    for (std::size_t l = 0; l < lanes; ++l) {
        double* __restrict bd = scratch.best_d.data() + l * stride;
        std::uint64_t* __restrict bi = scratch.best_i.data() + l * stride;
        std::fill(bd, bd + tile_len, std::numeric_limits<double>::infinity());
        std::fill(bi, bi + tile_len, static_cast<std::uint64_t>(kNoIndex));
        const double* __restrict sx = scratch.sx.data();
        const double* __restrict sy = scratch.sy.data();
        const double* __restrict sz = scratch.sz.data();
        for (std::size_t j = target.lane_begin[l]; j < target.lane_begin[l + 1]; ++j) {
            const double tx = target.x[j], ty = target.y[j], tz = target.z[j];
            const auto tj = static_cast<std::uint64_t>(j);
            for (std::size_t s = 0; s < tile_len; ++s) {
                const double dx = tx - sx[s];
                const double dy = ty - sy[s];
                const double dz = tz - sz[s];
                const double d = dx * dx + dy * dy + dz * dz;
                const bool smaller = d < bd[s];
                bd[s] = smaller ? d : bd[s];
                bi[s] = smaller ? tj : bi[s];
                if constexpr (Observer::enabled) {
                    observer(LaneEvent{tile_begin + s, l, j, bd[s]});
                }
            }
        }
    }

    // Stage 3: binary comparison tree over the lane registers, (distance,
    // index) lexicographic so ties resolve to the smaller target index.
    for (std::size_t width = 1; width < lanes; width *= 2) {
        for (std::size_t l = 0; l + width < lanes; l += 2 * width) {
            double* ld = scratch.best_d.data() + l * stride;
            std::uint64_t* li = scratch.best_i.data() + l * stride;
            const double* rd = scratch.best_d.data() + (l + width) * stride;
            const std::uint64_t* ri = scratch.best_i.data() + (l + width) * stride;
            for (std::size_t s = 0; s < tile_len; ++s) {
                if (improves(rd[s], ri[s], ld[s], li[s])) {
                    ld[s] = rd[s];
                    li[s] = ri[s];
                }
            }
        }
    }

    // Stage 4: emit in source order.
    for (std::size_t s = 0; s < tile_len; ++s) {
        out[tile_begin + s] = NnResult{tile_begin + s, static_cast<std::size_t>(scratch.best_i[s]),
                                       scratch.best_d[s]};
    }
}

unsigned resolve_workers(unsigned requested, std::size_t tiles) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, tiles));
}

template <class Observer>
std::vector<NnResult> run_kernel(const PointCloud& source, const PointCloud& target,
                                 const TileConfig& cfg, unsigned workers, const Observer& observer) {
    cfg.validate();
    check_inputs(source, target);
    if (target.size() > cfg.target_capacity) {
        throw CapacityExceededError(target.size(), cfg.target_capacity);
    }

    const PartitionedTarget partitioned(target, cfg.target_partitions);
    const std::size_t tile = std::min(cfg.source_tile_size, source.size());
    const std::size_t tiles = (source.size() + tile - 1) / tile;
    std::vector<NnResult> out(source.size());

    auto run_tile = [&](std::size_t t, TileScratch& scratch) {
        const std::size_t begin = t * tile;
        const std::size_t len = std::min(tile, source.size() - begin);
        process_tile(source, partitioned, begin, len, scratch, out, observer);
    };

    workers = resolve_workers(workers, tiles);
    if (workers <= 1) {
        TileScratch scratch(tile, partitioned.lanes());
        for (std::size_t t = 0; t < tiles; ++t) run_tile(t, scratch);
        return out;
    }

    // Tiles are independent and each writes its own output slice, so the
    // result does not depend on which worker picks up which tile.
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                TileScratch scratch(tile, partitioned.lanes());
                for (std::size_t t = next.fetch_add(1); t < tiles; t = next.fetch_add(1)) {
                    run_tile(t, scratch);
                }
            });
        }
    }
    return out;
}

}  // namespace

std::vector<NnResult> brute_force_nn(const PointCloud& source, const PointCloud& target,
                                     const TileConfig& cfg) {
    return run_kernel(source, target, cfg, cfg.workers, NullObserver{});
}

std::vector<NnResult> brute_force_nn_traced(const PointCloud& source, const PointCloud& target,
                                            const TileConfig& cfg, const LaneObserver& observer) {
    if (!observer) return run_kernel(source, target, cfg, 1, NullObserver{});
    return run_kernel(source, target, cfg, 1, ForwardingObserver{&observer});
}

std::vector<NnResult> naive_nn(const PointCloud& source, const PointCloud& target) {
    check_inputs(source, target);
    std::vector<NnResult> out(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        NnResult best{i, kNoIndex, std::numeric_limits<double>::infinity()};
        for (std::size_t j = 0; j < target.size(); ++j) {
            const double d = squared_distance(target[j], source[i]);
            if (d < best.squared_distance) {
                best.squared_distance = d;
                best.target_index = j;
            }
        }
        out[i] = best;
    }
    return out;
}

std::string_view to_string(Backend backend) {
    switch (backend) {
        case Backend::parallel: return "parallel";
        case Backend::naive: return "naive";
        case Backend::kdtree: return "kdtree";
    }
    return "unknown";
}

Backend parse_backend(std::string_view name) {
    if (name == "parallel") return Backend::parallel;
    if (name == "naive") return Backend::naive;
    if (name == "kdtree") return Backend::kdtree;
    throw ConfigError("unknown backend '" + std::string(name) +
                      "' (expected parallel, naive or kdtree)");
}

Backend backend_from_environment(Backend fallback) {
    const char* env = std::getenv("FPPS_BACKEND");
    if (env == nullptr || *env == '\0') return fallback;
    return parse_backend(env);
}

NnSearcher::NnSearcher(PointCloud target, Backend backend, TileConfig tile)
    : target_(std::move(target)), backend_(backend), tile_(tile) {
    tile_.validate();
    if (target_.empty()) throw EmptyCloudError("target cloud is empty");
    if (backend_ == Backend::parallel && target_.size() > tile_.target_capacity) {
        throw CapacityExceededError(target_.size(), tile_.target_capacity);
    }
    if (backend_ == Backend::kdtree) tree_ = std::make_unique<KdTree>(target_);
}

NnSearcher::~NnSearcher() = default;
NnSearcher::NnSearcher(NnSearcher&&) noexcept = default;
NnSearcher& NnSearcher::operator=(NnSearcher&&) noexcept = default;

std::vector<NnResult> NnSearcher::search(const PointCloud& source) const {
    switch (backend_) {
        case Backend::parallel: return brute_force_nn(source, target_, tile_);
        case Backend::naive: return naive_nn(source, target_);
        case Backend::kdtree:
            if (source.empty()) throw EmptyCloudError("source cloud is empty");
            return kdtree_nn(*tree_, source);
    }
    return {};
}

}  // namespace fpps::nn
