#include "fpps/linalg.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace fpps {

double frobenius_norm(const Mat3& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

namespace {

// Any unit vector orthogonal to `a` (a must be unit length).
Vec3 any_orthogonal(Vec3 a) {
    const double ax = std::abs(a.x), ay = std::abs(a.y), az = std::abs(a.z);
    Vec3 axis{1, 0, 0};
    if (ay <= ax && ay <= az) {
        axis = {0, 1, 0};
    } else if (az <= ax && az <= ay) {
        axis = {0, 0, 1};
    }
    const Vec3 c = cross(a, axis);
    return (1.0 / norm(c)) * c;
}

}  // namespace

Svd3 jacobi_svd(const Mat3& a, double tolerance, int max_sweeps) {
    // Work on columns: w = a·v, converging to columns that are mutually
    // orthogonal, at which point w = u·diag(sigma).
    std::array<Vec3, 3> w{a.col(0), a.col(1), a.col(2)};
    std::array<Vec3, 3> v{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    constexpr std::array<std::pair<int, int>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (auto [p, q] : kPairs) {
            const double alpha = dot(w[p], w[p]);
            const double beta = dot(w[q], w[q]);
            const double gamma = dot(w[p], w[q]);
            if (gamma == 0.0 || std::abs(gamma) <= tolerance * std::sqrt(alpha * beta)) {
                continue;
            }
            rotated = true;
            const double zeta = (beta - alpha) / (2.0 * gamma);
            const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
            const double c = 1.0 / std::sqrt(1.0 + t * t);
            const double s = c * t;
            const Vec3 wp = w[p], wq = w[q];
            w[p] = c * wp - s * wq;
            w[q] = s * wp + c * wq;
            const Vec3 vp = v[p], vq = v[q];
            v[p] = c * vp - s * vq;
            v[q] = s * vp + c * vq;
        }
        if (!rotated) break;
    }

    std::array<double, 3> sigma{norm(w[0]), norm(w[1]), norm(w[2])};
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return sigma[i] > sigma[j]; });

    Svd3 out;
    out.sweeps = sweep;
    std::array<Vec3, 3> u_cols;
    std::array<Vec3, 3> v_cols;
    for (int k = 0; k < 3; ++k) {
        out.singular[k] = sigma[order[k]];
        v_cols[k] = v[order[k]];
        u_cols[k] = w[order[k]];
    }

    // Normalise left singular vectors; complete the basis where a singular
    // value is numerically zero relative to the largest.
    const double zero_floor = out.singular[0] * 1e-14;
    const bool rank0 = !(out.singular[0] > 0.0);
    if (rank0) {
        u_cols = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    } else {
        u_cols[0] = (1.0 / out.singular[0]) * u_cols[0];
        if (out.singular[1] > zero_floor) {
            u_cols[1] = (1.0 / out.singular[1]) * u_cols[1];
        } else {
            u_cols[1] = any_orthogonal(u_cols[0]);
        }
        if (out.singular[2] > zero_floor && out.singular[1] > zero_floor) {
            u_cols[2] = (1.0 / out.singular[2]) * u_cols[2];
        } else {
            u_cols[2] = cross(u_cols[0], u_cols[1]);
        }
    }

    // Sorting may have made v improper; flipping a column pair keeps a = u·s·vᵀ.
    Mat3 vm = Mat3::from_columns(v_cols[0], v_cols[1], v_cols[2]);
    if (vm.determinant() < 0.0) {
        v_cols[2] = -v_cols[2];
        u_cols[2] = -u_cols[2];
        vm = Mat3::from_columns(v_cols[0], v_cols[1], v_cols[2]);
    }
    out.v = vm;
    out.u = Mat3::from_columns(u_cols[0], u_cols[1], u_cols[2]);
    return out;
}

Mat3 nearest_rotation(const Mat3& a) {
    const Svd3 svd = jacobi_svd(a);
    const Mat3 vt = svd.v.transposed();
    const double d = (svd.u * vt).determinant() < 0.0 ? -1.0 : 1.0;
    return svd.u * Mat3::diagonal(1.0, 1.0, d) * vt;
}

}  // namespace fpps
