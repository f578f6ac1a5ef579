#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "fpps/geometry.hpp"

namespace fpps::io {

/// One velodyne scan. `intensities[i]` is the reflectance of `points[i]`.
struct KittiFrame {
    PointCloud points;
    std::vector<float> intensities;
    int sequence_id = -1;    // from the ".../<seq>/velodyne/<frame>.bin" layout, else -1
    long frame_index = -1;   // numeric file stem, else -1
};

/// Packed little-endian float32 records (x, y, z, reflectance).
///
/// Throws FormatError when the byte length is not a multiple of 16 or a
/// coordinate is NaN/Inf (location = point index). An empty file yields an
/// empty frame and a warning.
KittiFrame read_kitti_bin(const std::filesystem::path& path);

/// Inverse of read_kitti_bin. Coordinates are narrowed to float32, so only
/// float-representable clouds survive a round trip bit for bit.
void write_kitti_bin(const std::filesystem::path& path, const KittiFrame& frame);

/// Ground-truth poses, one per frame.
struct PoseTrack {
    std::vector<RigidTransform> poses;
};

/// Twelve reals per line, the row-major top 3x4 of each pose. Rotations that
/// are not orthonormal to 1e-12 are projected onto SO(3); a projection moving
/// any entry more than 1e-6 is rejected. Throws FormatError with the 1-based
/// line number.
PoseTrack read_kitti_poses(const std::filesystem::path& path);
/// Writes the shortest decimal form of each entry, so a re-read is exact.
void write_kitti_poses(const std::filesystem::path& path, const PoseTrack& track);

/// Plain text, one "x y z" per line; '#' starts a comment.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// Dispatches on extension: ".bin" is a KITTI scan, ".xyz"/".txt" is text.
PointCloud load_cloud(const std::filesystem::path& path);

/// PRNG used for sampling and synthetic data: std::mt19937_64 seeded with
/// the raw seed. Bounded integers use rejection sampling and reals take the
/// top 53 bits, so streams are identical on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, bound).
    std::uint64_t uniform_index(std::uint64_t bound);
    /// Uniform in [0, 1).
    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Standard normal via the Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Uniform sample of `n` points without replacement, kept in original index
/// order. Returns the whole cloud when n >= |cloud|.
PointCloud sample_points(const PointCloud& cloud, std::size_t n, std::uint64_t seed);
/// Indices chosen by sample_points, ascending. n == 0 is a ConfigError.
std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n, std::uint64_t seed);

}  // namespace fpps::io
