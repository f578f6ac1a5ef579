#include "fpps/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "fpps/error.hpp"

namespace fpps {

namespace {

constexpr double kComposeDriftLimit = 1e-12;

}  // namespace

RigidTransform RigidTransform::from_matrix4(const std::array<double, 16>& m) {
    const Mat3 r({m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]});
    return {r, Vec3{m[3], m[7], m[11]}};
}

RigidTransform RigidTransform::from_axis_angle(Vec3 axis, double angle, Vec3 translation) {
    const double n = norm(axis);
    if (n == 0.0 || angle == 0.0) return {Mat3::identity(), translation};
    const Vec3 k = (1.0 / n) * axis;
    const double c = std::cos(angle), s = std::sin(angle), C = 1.0 - c;
    const Mat3 r({c + k.x * k.x * C, k.x * k.y * C - k.z * s, k.x * k.z * C + k.y * s,
                  k.y * k.x * C + k.z * s, c + k.y * k.y * C, k.y * k.z * C - k.x * s,
                  k.z * k.x * C - k.y * s, k.z * k.y * C + k.x * s, c + k.z * k.z * C});
    return {r, translation};
}

std::array<double, 16> RigidTransform::matrix4() const {
    const Mat3& r = rotation_;
    return {r(0, 0), r(0, 1), r(0, 2), translation_.x,
            r(1, 0), r(1, 1), r(1, 2), translation_.y,
            r(2, 0), r(2, 1), r(2, 2), translation_.z,
            0.0,     0.0,     0.0,     1.0};
}

double RigidTransform::orthogonality_error() const {
    return frobenius_norm(rotation_.transposed() * rotation_ - Mat3::identity());
}

bool RigidTransform::is_valid(double tolerance) const {
    for (double v : rotation_.data()) {
        if (!std::isfinite(v)) return false;
    }
    if (!is_finite(translation_)) return false;
    return orthogonality_error() <= tolerance &&
           std::abs(rotation_.determinant() - 1.0) <= tolerance;
}

void RigidTransform::validate(double tolerance) const {
    if (is_valid(tolerance)) return;
    std::ostringstream os;
    os << "rotation is not in SO(3): ‖RᵀR−I‖_F = " << orthogonality_error()
       << ", det(R) = " << rotation_.determinant();
    throw InvalidTransformError(os.str());
}

double RigidTransform::rotation_angle() const {
    const Mat3& r = rotation_;
    const double c = std::clamp((r(0, 0) + r(1, 1) + r(2, 2) - 1.0) / 2.0, -1.0, 1.0);
    // acos loses precision near 0; use the skew part there.
    const Vec3 skew{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
    return std::atan2(0.5 * norm(skew), c);
}

Point3 apply_transform(const Point3& p, const RigidTransform& transform) {
    const Mat3& r = transform.rotation();
    const Vec3& t = transform.translation();
    return {r(0, 0) * p.x + r(0, 1) * p.y + r(0, 2) * p.z + t.x,
            r(1, 0) * p.x + r(1, 1) * p.y + r(1, 2) * p.z + t.y,
            r(2, 0) * p.x + r(2, 1) * p.y + r(2, 2) * p.z + t.z};
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& transform) {
    transform.validate();
    PointCloud out;
    out.frame_id = cloud.frame_id;
    out.points.resize(cloud.size());
    std::transform(cloud.points.begin(), cloud.points.end(), out.points.begin(),
                   [&](const Point3& p) { return apply_transform(p, transform); });
    return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    a.validate();
    b.validate();
    Mat3 r = a.rotation() * b.rotation();
    const Vec3 t = a.rotation() * b.translation() + a.translation();
    if (frobenius_norm(r.transposed() * r - Mat3::identity()) > kComposeDriftLimit) {
        r = nearest_rotation(r);
    }
    return {r, t};
}

RigidTransform inverse(const RigidTransform& transform) {
    transform.validate();
    const Mat3 rt = transform.rotation().transposed();
    return {rt, -(rt * transform.translation())};
}

double transform_delta(const RigidTransform& transform) {
    return std::max(frobenius_norm(transform.rotation() - Mat3::identity()),
                    norm(transform.translation()));
}

}  // namespace fpps
