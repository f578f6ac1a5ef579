#pragma once

#include <cstdint>
#include <vector>

#include "fpps/geometry.hpp"

namespace fpps::synthetic {

/// A registration problem with known answer: target ≈ ground_truth · source.
struct SyntheticPair {
    PointCloud source;
    PointCloud target;
    RigidTransform ground_truth;
    /// outlier[i] is true when target[i] was replaced by a far random point.
    std::vector<bool> outlier;
};

/// Points drawn from a fixed street-like scene around the origin: a ground
/// patch, two walls, a ramp, poles and compact clusters. The mixture gives
/// nearest-neighbour matching real structure to lock onto in every direction.
PointCloud make_scene(std::size_t n, std::uint64_t seed);

/// Source from make_scene; target = motion applied to source plus isotropic
/// Gaussian noise of `noise_sigma` metres per axis, with a fraction of target
/// points swapped for points 30–50 m from the scene.
///
/// Requires n >= 3 and 0 <= outlier_fraction < 1 (ConfigError otherwise).
/// Bit-reproducible for a fixed seed.
SyntheticPair make_synthetic_pair(std::size_t n, const RigidTransform& motion, double noise_sigma,
                                  double outlier_fraction, std::uint64_t seed);

/// Random rigid motion with translation norm ≤ max_translation and rotation
/// angle ≤ max_angle (radians), about a uniformly random axis.
RigidTransform random_motion(std::uint64_t seed, double max_translation, double max_angle);

}  // namespace fpps::synthetic
