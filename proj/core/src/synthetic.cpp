#include "fpps/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "fpps/dataset_io.hpp"
#include "fpps/error.hpp"

namespace fpps::synthetic {

namespace {

// A planar patch: origin + a·u + b·v with a ∈ [0, extent_u], b ∈ [0, extent_v].
struct Patch {
    Vec3 origin, u, v;
    double extent_u, extent_v;
};

struct Blob {
    Vec3 center;
    double sigma;
};

struct Pole {
    double x, y, radius, z_lo, z_hi;
};

constexpr double kGround = -1.6;

const std::array<Patch, 4> kPatches{{
    {{-8.0, -8.0, kGround}, {1, 0, 0}, {0, 1, 0}, 16.0, 16.0},   // ground
    {{6.0, -8.0, kGround}, {0, 1, 0}, {0, 0, 1}, 16.0, 4.1},     // wall facing -x
    {{-8.0, 7.0, kGround}, {1, 0, 0}, {0, 0, 1}, 14.0, 4.1},     // wall facing -y
    {{-7.0, -7.5, kGround}, {0.8, 0.0, 0.6}, {0, 1, 0}, 4.0, 5.0},  // ramp
}};

const std::array<Blob, 6> kBlobs{{
    {{-3.0, 2.0, 0.0}, 0.5},
    {{2.0, -3.0, -0.6}, 0.4},
    {{-5.0, -3.0, 0.4}, 0.7},
    {{3.0, 4.0, 1.0}, 0.3},
    {{0.5, 0.5, -0.9}, 0.6},
    {{4.5, -5.5, 0.8}, 0.5},
}};

const std::array<Pole, 3> kPoles{{
    {-2.0, -6.0, 0.15, kGround, 2.2},
    {4.0, -1.0, 0.12, kGround, 2.5},
    {-6.0, 5.0, 0.2, kGround, 2.0},
}};

// Share of points per component family, in order: ground, walls, ramp,
// blobs, poles.
constexpr std::array<double, 5> kShare{0.30, 0.24, 0.08, 0.30, 0.08};

Point3 draw_patch(const Patch& p, io::Rng& rng) {
    const double a = rng.uniform(0.0, p.extent_u);
    const double b = rng.uniform(0.0, p.extent_v);
    return p.origin + a * p.u + b * p.v;
}

Point3 draw_blob(const Blob& b, io::Rng& rng) {
    const double x = rng.normal(), y = rng.normal(), z = rng.normal();
    return b.center + b.sigma * Vec3{x, y, z};
}

Point3 draw_pole(const Pole& p, io::Rng& rng) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double z = rng.uniform(p.z_lo, p.z_hi);
    return {p.x + p.radius * std::cos(theta), p.y + p.radius * std::sin(theta), z};
}

Vec3 random_unit(io::Rng& rng) {
    for (;;) {
        const Vec3 g{rng.normal(), rng.normal(), rng.normal()};
        const double n = norm(g);
        if (n > 1e-12) return (1.0 / n) * g;
    }
}

}  // namespace

PointCloud make_scene(std::size_t n, std::uint64_t seed) {
    io::Rng rng(seed);
    PointCloud cloud;
    cloud.frame_id = "synthetic";
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pick = rng.uniform01();
        std::size_t family = 0;
        while (family + 1 < kShare.size() && pick >= kShare[family]) {
            pick -= kShare[family];
            ++family;
        }
        switch (family) {
            case 0: cloud.points.push_back(draw_patch(kPatches[0], rng)); break;
            case 1: cloud.points.push_back(draw_patch(kPatches[1 + rng.uniform_index(2)], rng)); break;
            case 2: cloud.points.push_back(draw_patch(kPatches[3], rng)); break;
            case 3: cloud.points.push_back(draw_blob(kBlobs[rng.uniform_index(kBlobs.size())], rng)); break;
            default: cloud.points.push_back(draw_pole(kPoles[rng.uniform_index(kPoles.size())], rng)); break;
        }
    }
    return cloud;
}

SyntheticPair make_synthetic_pair(std::size_t n, const RigidTransform& motion, double noise_sigma,
                                  double outlier_fraction, std::uint64_t seed) {
    if (n < 3) throw ConfigError("a synthetic pair needs at least 3 points");
    if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
        throw ConfigError("outlier_fraction must lie in [0, 1)");
    }
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
    motion.validate();

    SyntheticPair pair;
    pair.source = make_scene(n, seed);
    pair.ground_truth = motion;
    pair.target = apply_transform(pair.source, motion);
    pair.target.frame_id = "synthetic-target";

    // Independent stream for the perturbations so the scene does not depend
    // on the noise settings.
    io::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    if (noise_sigma > 0.0) {
        for (Point3& p : pair.target.points) {
            const double x = rng.normal(), y = rng.normal(), z = rng.normal();
            p = p + noise_sigma * Vec3{x, y, z};
        }
    }

    pair.outlier.assign(n, false);
    const auto n_out = static_cast<std::size_t>(std::floor(outlier_fraction * static_cast<double>(n)));
    if (n_out > 0) {
        const std::vector<std::size_t> idx = io::sample_indices(n, n_out, rng.next());
        for (std::size_t i : idx) {
            pair.outlier[i] = true;
            const double radius = rng.uniform(30.0, 50.0);
            pair.target[i] = motion.translation() + radius * random_unit(rng);
        }
    }
    return pair;
}

RigidTransform random_motion(std::uint64_t seed, double max_translation, double max_angle) {
    io::Rng rng(seed);
    const Vec3 axis = random_unit(rng);
    const double angle = rng.uniform(0.0, max_angle);
    const double distance = rng.uniform(0.0, max_translation);
    const Vec3 t = distance * random_unit(rng);
    return RigidTransform::from_axis_angle(axis, angle, t);
}

}  // namespace fpps::synthetic
