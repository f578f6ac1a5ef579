#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpps/linalg.hpp"

namespace fpps {

/// A point in metres. Storage is double; float inputs are promoted on load.
using Point3 = Vec3;

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Ordered point set. Index i always refers to the same physical point.
struct PointCloud {
    std::vector<Point3> points;
    std::string frame_id;

    PointCloud() = default;
    explicit PointCloud(std::vector<Point3> pts, std::string frame = {})
        : points(std::move(pts)), frame_id(std::move(frame)) {}

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    const Point3& operator[](std::size_t i) const { return points[i]; }
    Point3& operator[](std::size_t i) { return points[i]; }
    std::span<const Point3> view() const noexcept { return points; }

    friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

/// Tolerance applied to both orthogonality and determinant checks.
inline constexpr double kRotationTolerance = 1e-9;

/// Rotation plus translation, i.e. the homogeneous matrix [R t; 0 1].
///
/// Construction does not validate; operations that consume a transform call
/// `validate()` and raise InvalidTransformError outside SO(3) tolerance.
class RigidTransform {
public:
    RigidTransform() = default;
    RigidTransform(const Mat3& rotation, Vec3 translation)
        : rotation_(rotation), translation_(translation) {}

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(Vec3 t) { return {Mat3::identity(), t}; }
    /// Row-major 4x4 homogeneous matrix; the last row is ignored.
    static RigidTransform from_matrix4(const std::array<double, 16>& m);
    /// Rotation of `angle` radians about `axis` (need not be unit length).
    static RigidTransform from_axis_angle(Vec3 axis, double angle, Vec3 translation = {});

    const Mat3& rotation() const noexcept { return rotation_; }
    const Vec3& translation() const noexcept { return translation_; }
    std::array<double, 16> matrix4() const;

    /// ‖RᵀR − I‖_F
    double orthogonality_error() const;
    bool is_valid(double tolerance = kRotationTolerance) const;
    /// Throws InvalidTransformError when `is_valid(tolerance)` is false.
    void validate(double tolerance = kRotationTolerance) const;

    /// Rotation angle in radians, in [0, π].
    double rotation_angle() const;

    friend bool operator==(const RigidTransform&, const RigidTransform&) = default;

private:
    Mat3 rotation_ = Mat3::identity();
    Vec3 translation_{};
};

/// output[i] = R·cloud[i] + t, preserving order and cardinality.
PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform);
Point3 apply_transform(const Point3& p, const RigidTransform& transform);

/// Product of the homogeneous forms, `a·b`: applies `b` first, then `a`.
/// The rotation is projected back onto SO(3) once drift exceeds 1e-12.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// (Rᵀ, −Rᵀt)
RigidTransform inverse(const RigidTransform& transform);

/// Convergence measure: max(‖R − I‖_F, ‖t‖₂).
double transform_delta(const RigidTransform& transform);

}  // namespace fpps
