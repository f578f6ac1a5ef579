#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fpps/geometry.hpp"
#include "fpps/nn_engine.hpp"

namespace fpps {

struct Correspondence {
    std::size_t source_index;
    std::size_t target_index;
    double squared_distance;

    friend bool operator==(const Correspondence&, const Correspondence&) = default;
};

/// Distance-gated nearest-neighbour pairs, in source order.
struct CorrespondenceSet {
    std::vector<Correspondence> pairs;

    std::size_t inlier_count() const noexcept { return pairs.size(); }

    friend bool operator==(const CorrespondenceSet&, const CorrespondenceSet&) = default;
};

struct IcpConfig {
    /// Pairs farther apart than this (metres) are rejected as outliers.
    double max_correspondence_distance = 1.0;
    std::size_t max_iterations = 50;
    /// Stop once transform_delta of an iteration's step falls below this.
    double transformation_epsilon = 1e-5;
    /// Applied once to the source before the first iteration.
    RigidTransform initial_transform;
    nn::TileConfig tile;
    nn::Backend backend = nn::Backend::parallel;

    /// Throws ConfigError or InvalidTransformError.
    void validate() const;
};

struct IterationRecord {
    RigidTransform step;            // T_j estimated in this iteration
    double cost = 0.0;              // Σ‖q − (R p + t)‖² over the gated pairs, after T_j
    std::size_t inlier_count = 0;
    double delta = 0.0;             // transform_delta(step)
    double wall_time_ms = 0.0;
};

struct IcpResult {
    /// T_k ⋯ T_1 · initial_transform
    RigidTransform final_transform;
    bool converged = false;
    std::size_t iterations_run = 0;
    /// sqrt(cost / inliers) of the final iteration.
    double fitness_rmse = 0.0;
    std::vector<IterationRecord> per_iteration;

    std::size_t final_inlier_count() const {
        return per_iteration.empty() ? 0 : per_iteration.back().inlier_count;
    }
};

/// Keeps pairs with squared_distance <= max_distance², preserving order.
/// Does not enforce a minimum count.
CorrespondenceSet gate_correspondences(std::span<const nn::NnResult> matches, double max_distance);

/// Nearest neighbours from the tiled kernel, gated by `max_distance`.
/// Throws DegenerateCorrespondenceError when fewer than 3 pairs survive.
CorrespondenceSet estimate_correspondences(const PointCloud& source, const PointCloud& target,
                                           double max_distance, const nn::TileConfig& tile = {});
CorrespondenceSet estimate_correspondences(const PointCloud& source, const nn::NnSearcher& searcher,
                                           double max_distance);

/// Closed-form least-squares rigid motion taking matched source points onto
/// their targets: centroids, cross-covariance H = Σ (p − p̄)(q − q̄)ᵀ,
/// H = UΣVᵀ, R = V·diag(1, 1, det(VUᵀ))·Uᵀ, t = q̄ − R p̄.
///
/// Throws DegenerateCorrespondenceError for fewer than 3 pairs and
/// DegenerateGeometryError when the two smallest singular values of H are
/// both below 1e-12 of the largest (collinear or coincident points).
RigidTransform estimate_transform(const PointCloud& source, const PointCloud& target,
                                  const CorrespondenceSet& corr);

/// Σ‖q_i − (R p_i + t)‖² over the given pairs.
double alignment_cost(const PointCloud& source, const PointCloud& target,
                      const CorrespondenceSet& corr, const RigidTransform& transform);

/// Point-to-point ICP.
///
/// Throws EmptyCloudError, ConfigError, and DegenerateCorrespondenceError
/// carrying the iteration at which the gate emptied.
IcpResult align(const PointCloud& source, const PointCloud& target, const IcpConfig& cfg = {});

}  // namespace fpps
