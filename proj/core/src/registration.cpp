#include "fpps/registration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fpps/error.hpp"

namespace fpps {

namespace {

constexpr std::size_t kMinPairs = 3;
constexpr double kRankFloor = 1e-12;

}  // namespace

void IcpConfig::validate() const {
    if (!(max_correspondence_distance > 0.0) || !std::isfinite(max_correspondence_distance)) {
        throw ConfigError("max_correspondence_distance must be a positive finite number");
    }
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!(transformation_epsilon >= 0.0)) {
        throw ConfigError("transformation_epsilon must be non-negative");
    }
    initial_transform.validate();
    tile.validate();
}

CorrespondenceSet gate_correspondences(std::span<const nn::NnResult> matches, double max_distance) {
    const double gate = max_distance * max_distance;
    CorrespondenceSet set;
    set.pairs.reserve(matches.size());
    for (const nn::NnResult& m : matches) {
        if (m.squared_distance <= gate) {
            set.pairs.push_back({m.source_index, m.target_index, m.squared_distance});
        }
    }
    return set;
}

CorrespondenceSet estimate_correspondences(const PointCloud& source, const nn::NnSearcher& searcher,
                                           double max_distance) {
    const std::vector<nn::NnResult> matches = searcher.search(source);
    CorrespondenceSet set = gate_correspondences(matches, max_distance);
    if (set.inlier_count() < kMinPairs) throw DegenerateCorrespondenceError(set.inlier_count());
    return set;
}

CorrespondenceSet estimate_correspondences(const PointCloud& source, const PointCloud& target,
                                           double max_distance, const nn::TileConfig& tile) {
    CorrespondenceSet set = gate_correspondences(nn::brute_force_nn(source, target, tile), max_distance);
    if (set.inlier_count() < kMinPairs) throw DegenerateCorrespondenceError(set.inlier_count());
    return set;
}

RigidTransform estimate_transform(const PointCloud& source, const PointCloud& target,
                                  const CorrespondenceSet& corr) {
    const std::size_t n = corr.inlier_count();
    if (n < kMinPairs) throw DegenerateCorrespondenceError(n);

    Vec3 p_sum, q_sum;
    for (const Correspondence& c : corr.pairs) {
        p_sum = p_sum + source[c.source_index];
        q_sum = q_sum + target[c.target_index];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const Vec3 p_bar = inv_n * p_sum;
    const Vec3 q_bar = inv_n * q_sum;

    // Result accumulator: cross-covariance of the centred pairs.
    Mat3 h;
    for (const Correspondence& c : corr.pairs) {
        h = h + outer(source[c.source_index] - p_bar, target[c.target_index] - q_bar);
    }

    const Svd3 svd = jacobi_svd(h);
    const double s0 = svd.singular[0];
    if (!(s0 > 0.0) || (svd.singular[1] < kRankFloor * s0 && svd.singular[2] < kRankFloor * s0)) {
        throw DegenerateGeometryError(
            "correspondences are collinear or coincident; rotation is unobservable");
    }

    // Pairs that already coincide have the identity as their exact optimum.
    const bool coincident = std::all_of(corr.pairs.begin(), corr.pairs.end(), [&](const Correspondence& c) {
        return source[c.source_index] == target[c.target_index];
    });
    if (coincident) return RigidTransform::identity();

    const Mat3 ut = svd.u.transposed();
    const double reflection = (svd.v * ut).determinant() < 0.0 ? -1.0 : 1.0;
    const Mat3 r = svd.v * Mat3::diagonal(1.0, 1.0, reflection) * ut;
    RigidTransform out(r, q_bar - r * p_bar);
    out.validate();
    return out;
}

double alignment_cost(const PointCloud& source, const PointCloud& target,
                      const CorrespondenceSet& corr, const RigidTransform& transform) {
    double cost = 0.0;
    for (const Correspondence& c : corr.pairs) {
        const Vec3 r = target[c.target_index] - apply_transform(source[c.source_index], transform);
        cost += dot(r, r);
    }
    return cost;
}

IcpResult align(const PointCloud& source, const PointCloud& target, const IcpConfig& cfg) {
    cfg.validate();
    if (source.empty()) throw EmptyCloudError("source cloud is empty");
    if (target.empty()) throw EmptyCloudError("target cloud is empty");

    using Clock = std::chrono::steady_clock;
    const nn::NnSearcher searcher(target, cfg.backend, cfg.tile);

    IcpResult result;
    result.final_transform = cfg.initial_transform;
    PointCloud working = apply_transform(source, cfg.initial_transform);
    result.per_iteration.reserve(cfg.max_iterations);

    for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
        const auto start = Clock::now();

        CorrespondenceSet corr;
        try {
            corr = estimate_correspondences(working, searcher, cfg.max_correspondence_distance);
        } catch (const DegenerateCorrespondenceError& e) {
            throw DegenerateCorrespondenceError(e.surviving(), iter);
        }
        const RigidTransform step = estimate_transform(working, target, corr);
        working = apply_transform(working, step);
        result.final_transform = compose(step, result.final_transform);

        IterationRecord rec;
        rec.step = step;
        rec.cost = alignment_cost(working, target, corr, RigidTransform::identity());
        rec.inlier_count = corr.inlier_count();
        rec.delta = transform_delta(step);
        rec.wall_time_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        result.per_iteration.push_back(rec);
        result.iterations_run = iter;

        if (rec.delta < cfg.transformation_epsilon) {
            result.converged = true;
            break;
        }
    }

    const IterationRecord& last = result.per_iteration.back();
    result.fitness_rmse = std::sqrt(last.cost / static_cast<double>(last.inlier_count));
    return result;
}

}  // namespace fpps
