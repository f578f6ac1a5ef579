#pragma once

#include <optional>
#include <string_view>

#include "fpps/registration.hpp"

namespace fpps {

/// Stateful, chainable front end with PCL-style method names.
///
///     IterativeClosestPoint icp;
///     icp.hardwareInitialize("kdtree")
///        .setInputSource(src)
///        .setInputTarget(tgt)
///        .setMaxCorrespondenceDistance(1.0);
///     IcpResult r = icp.align();
///
/// Not safe for concurrent mutation. A configured instance may be moved to
/// another thread, and independent instances may run in parallel.
class IterativeClosestPoint {
public:
    /// Selects the nearest-neighbour backend. Without an argument the
    /// FPPS_BACKEND environment variable is consulted, defaulting to
    /// "parallel". There is no device to initialise in this implementation.
    IterativeClosestPoint& hardwareInitialize();
    IterativeClosestPoint& hardwareInitialize(nn::Backend backend);
    IterativeClosestPoint& hardwareInitialize(std::string_view backend);

    IterativeClosestPoint& setInputSource(PointCloud source);
    IterativeClosestPoint& setInputTarget(PointCloud target);
    /// The numeric setters throw ConfigError (InvalidTransformError for the
    /// matrix) on out-of-range values instead of deferring to align().
    IterativeClosestPoint& setTransformationMatrix(const RigidTransform& initial);
    IterativeClosestPoint& setMaxCorrespondenceDistance(double distance);
    IterativeClosestPoint& setMaxIterationCount(std::size_t iterations);
    IterativeClosestPoint& setTransformationEpsilon(double epsilon);
    IterativeClosestPoint& setTileConfig(const nn::TileConfig& tile);

    /// Runs ICP on the configured clouds. Throws ConfigError naming every
    /// missing input when source or target has not been set.
    IcpResult align();

    /// Final transform of the most recent align(); identity before any run.
    RigidTransform getFinalTransformation() const;
    bool hasConverged() const;

    /// Effective configuration, with the backend resolved.
    IcpConfig config() const;
    nn::Backend backend() const;

private:
    std::optional<PointCloud> source_;
    std::optional<PointCloud> target_;
    std::optional<nn::Backend> backend_;
    IcpConfig cfg_;
    std::optional<IcpResult> last_;
};

}  // namespace fpps
