#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace fpps {

/// Column 3-vector in double precision.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator-(Vec3 a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Row-major 3x3 matrix.
class Mat3 {
public:
    constexpr Mat3() = default;
    constexpr explicit Mat3(const std::array<double, 9>& row_major) : m_(row_major) {}

    static constexpr Mat3 identity() { return Mat3({1, 0, 0, 0, 1, 0, 0, 0, 1}); }
    static constexpr Mat3 zero() { return Mat3(); }
    static constexpr Mat3 diagonal(double a, double b, double c) {
        return Mat3({a, 0, 0, 0, b, 0, 0, 0, c});
    }
    static constexpr Mat3 from_columns(Vec3 c0, Vec3 c1, Vec3 c2) {
        return Mat3({c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z});
    }

    constexpr double operator()(int r, int c) const { return m_[static_cast<std::size_t>(3 * r + c)]; }
    constexpr double& operator()(int r, int c) { return m_[static_cast<std::size_t>(3 * r + c)]; }

    constexpr Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
    constexpr Vec3 col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }
    constexpr const std::array<double, 9>& data() const { return m_; }

    constexpr Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    constexpr double determinant() const {
        const Mat3& a = *this;
        return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
               a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
               a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    }

    friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
        return out;
    }

    friend constexpr Vec3 operator*(const Mat3& a, Vec3 v) {
        return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
                a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
                a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
    }

    friend constexpr Mat3 operator+(const Mat3& a, const Mat3& b) {
        Mat3 out;
        for (std::size_t i = 0; i < 9; ++i) out.m_[i] = a.m_[i] + b.m_[i];
        return out;
    }

    friend constexpr Mat3 operator-(const Mat3& a, const Mat3& b) {
        Mat3 out;
        for (std::size_t i = 0; i < 9; ++i) out.m_[i] = a.m_[i] - b.m_[i];
        return out;
    }

    friend constexpr bool operator==(const Mat3&, const Mat3&) = default;

private:
    std::array<double, 9> m_{};
};

/// Outer product a·bᵀ.
constexpr Mat3 outer(Vec3 a, Vec3 b) {
    return Mat3({a.x * b.x, a.x * b.y, a.x * b.z,
                 a.y * b.x, a.y * b.y, a.y * b.z,
                 a.z * b.x, a.z * b.y, a.z * b.z});
}

double frobenius_norm(const Mat3& a);

/// Thin SVD of a 3x3 matrix, `a = u * diag(singular) * vᵀ`.
///
/// Singular values are sorted in non-increasing order. `v` is a proper
/// rotation; `u` is orthogonal but may have determinant -1. Columns of `u`
/// belonging to numerically zero singular values are completed to an
/// orthonormal basis.
struct Svd3 {
    Mat3 u;
    Vec3 singular;
    Mat3 v;
    int sweeps = 0;
};

/// One-sided (Hestenes) Jacobi SVD. Sweeps in the fixed pair order
/// (0,1), (0,2), (1,2) until every column pair is orthogonal to within
/// `tolerance` relative to the column norms, so results are deterministic.
Svd3 jacobi_svd(const Mat3& a, double tolerance = 1e-14, int max_sweeps = 64);

/// Nearest rotation matrix to `a` in the Frobenius sense (polar factor with
/// the determinant forced to +1).
Mat3 nearest_rotation(const Mat3& a);

}  // namespace fpps
