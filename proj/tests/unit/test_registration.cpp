#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "fpps/error.hpp"
#include "fpps/registration.hpp"
#include "fpps/synthetic.hpp"
#include "oracles.hpp"

using namespace fpps;

namespace {

CorrespondenceSet identity_pairs(std::size_t n) {
    CorrespondenceSet c;
    for (std::size_t i = 0; i < n; ++i) c.pairs.push_back({i, i, 0.0});
    return c;
}

double translation_error(const RigidTransform& a, const RigidTransform& b) {
    return norm(a.translation() - b.translation());
}

double rotation_error(const RigidTransform& a, const RigidTransform& b) {
    return compose(inverse(a), b).rotation_angle();
}

}  // namespace

TEST(Registration, GateKeepsBoundaryAndPreservesOrder) {
    const std::vector<nn::NnResult> m{{0, 4, 0.25}, {1, 2, 1.0}, {2, 9, 1.0000001}, {3, 1, 0.0}};
    const CorrespondenceSet c = gate_correspondences(m, 1.0);
    ASSERT_EQ(c.inlier_count(), 3u);
    EXPECT_EQ(c.pairs[0].source_index, 0u);
    EXPECT_EQ(c.pairs[1].source_index, 1u);
    EXPECT_EQ(c.pairs[2].source_index, 3u);
}

TEST(Registration, TooFewCorrespondencesIsDegenerate) {
    const PointCloud src({{0, 0, 0}, {10, 0, 0}, {0, 10, 0}});
    const PointCloud tgt({{0, 0, 0}, {50, 0, 0}, {0, 50, 0}});
    try {
        estimate_correspondences(src, tgt, 1.0, {});
        FAIL();
    } catch (const DegenerateCorrespondenceError& e) {
        EXPECT_EQ(e.surviving(), 1u);
        EXPECT_EQ(e.iteration(), 0u);
    }
}

TEST(Registration, EstimateRecoversExactMotion) {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 50; ++trial) {
        const PointCloud src = oracle::random_cloud(gen, 50);
        const auto truth = synthetic::random_motion(gen(), 5.0, std::numbers::pi);
        const PointCloud tgt = apply_transform(src, truth);
        const RigidTransform est = estimate_transform(src, tgt, identity_pairs(src.size()));
        EXPECT_LT(translation_error(est, truth), 1e-9);
        EXPECT_LT(rotation_error(est, truth), 1e-9);
        EXPECT_NEAR(est.rotation().determinant(), 1.0, 1e-12);
    }
}

TEST(Registration, ReflectionIsCorrected) {
    // A planar set mirrored through its own plane: the best proper rotation
    // still has determinant +1.
    const PointCloud src({{1, 0, 0}, {0, 2, 0}, {-1, -1, 0}, {2, 1, 0}});
    PointCloud tgt = src;
    for (auto& p : tgt.points) p.x = -p.x;
    const RigidTransform est = estimate_transform(src, tgt, identity_pairs(4));
    EXPECT_NEAR(est.rotation().determinant(), 1.0, 1e-12);
}

TEST(Registration, CollinearPointsAreDegenerate) {
    const PointCloud line({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}});
    EXPECT_THROW(estimate_transform(line, line, identity_pairs(4)), DegenerateGeometryError);
    const PointCloud same({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
    EXPECT_THROW(estimate_transform(same, same, identity_pairs(3)), DegenerateGeometryError);
}

TEST(Registration, EstimateMinimisesCost) {
    std::mt19937_64 gen(40);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> perturb(-0.01, 0.01);
    const PointCloud src = oracle::random_cloud(gen, 60);
    PointCloud tgt = apply_transform(src, synthetic::random_motion(5, 2.0, 0.5));
    for (auto& p : tgt.points) p = p + Vec3{noise(gen), noise(gen), noise(gen)};
    const auto corr = identity_pairs(src.size());
    const RigidTransform est = estimate_transform(src, tgt, corr);
    const double best = alignment_cost(src, tgt, corr, est);
    for (int k = 0; k < 200; ++k) {
        const RigidTransform p = compose(
            RigidTransform::from_axis_angle({perturb(gen), perturb(gen), perturb(gen) + 1e-3}, perturb(gen),
                                            {perturb(gen), perturb(gen), perturb(gen)}),
            est);
        EXPECT_LE(best, alignment_cost(src, tgt, corr, p));
    }
}

TEST(Registration, CostMatchesOracle) {
    std::mt19937_64 gen(41);
    const PointCloud src = oracle::random_cloud(gen, 30);
    const PointCloud tgt = oracle::random_cloud(gen, 30);
    const oracle::Mat4 m = oracle::rotation4(0.5, 1, 2, 3, 0.1, 0.2, 0.3);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < 30; ++i) pairs.emplace_back(i, (i * 7) % 30);
    CorrespondenceSet c;
    for (auto [i, j] : pairs) c.pairs.push_back({i, j, 0.0});
    EXPECT_NEAR(alignment_cost(src, tgt, c, RigidTransform::from_matrix4(m)), oracle::cost(src, tgt, pairs, m),
                1e-9);
}

TEST(Registration, AlignRecoversSyntheticMotion) {
    const auto truth = RigidTransform::from_axis_angle({0.2, -0.3, 1.0}, 0.35, {1.2, -0.4, 0.1});
    const auto pair = synthetic::make_synthetic_pair(2000, truth, 0.0, 0.0, 3);
    const IcpResult r = align(pair.source, pair.target);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations_run, 50u);
    EXPECT_LT(translation_error(r.final_transform, truth), 1e-4);
    EXPECT_LT(rotation_error(r.final_transform, truth), 1e-4);
    EXPECT_LT(r.fitness_rmse, 1e-4);
}

TEST(Registration, IdenticalCloudsConvergeImmediately) {
    const PointCloud c = synthetic::make_scene(800, 4);
    const IcpResult r = align(c, c);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations_run, 1u);
    EXPECT_EQ(r.fitness_rmse, 0.0);
    EXPECT_LT(transform_delta(r.final_transform), 1e-12);
}

TEST(Registration, IterationCapReportsNonConvergence) {
    const auto truth = RigidTransform::from_axis_angle({0, 0, 1}, 0.4, {1.5, 0.5, 0});
    const auto pair = synthetic::make_synthetic_pair(1000, truth, 0.0, 0.0, 9);
    IcpConfig cfg;
    cfg.max_iterations = 1;
    const IcpResult r = align(pair.source, pair.target, cfg);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations_run, 1u);
    EXPECT_EQ(r.per_iteration.size(), 1u);
}

TEST(Registration, InitialTransformIsAppliedOnce) {
    const auto truth = RigidTransform::from_axis_angle({1, 0, 0}, 0.2, {0.5, 0, 0});
    const auto pair = synthetic::make_synthetic_pair(1500, truth, 0.0, 0.0, 10);
    IcpConfig cfg;
    cfg.initial_transform = truth;
    const IcpResult r = align(pair.source, pair.target, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations_run, 1u);
    EXPECT_LT(translation_error(r.final_transform, truth), 1e-9);
}

TEST(Registration, PerIterationLogIsConsistent) {
    const auto truth = RigidTransform::from_axis_angle({0.5, 0.5, 1}, 0.25, {0.8, 0.3, -0.2});
    const auto pair = synthetic::make_synthetic_pair(1500, truth, 0.0, 0.0, 13);
    const IcpResult r = align(pair.source, pair.target);
    ASSERT_EQ(r.per_iteration.size(), r.iterations_run);
    RigidTransform acc;
    for (const auto& it : r.per_iteration) acc = compose(it.step, acc);
    EXPECT_LT(oracle::max_abs_diff(acc.matrix4(), r.final_transform.matrix4()), 1e-12);
    const auto& last = r.per_iteration.back();
    EXPECT_NEAR(r.fitness_rmse, std::sqrt(last.cost / static_cast<double>(last.inlier_count)), 1e-15);
}

TEST(Registration, BackendsGiveIdenticalResults) {
    const auto truth = RigidTransform::from_axis_angle({0.1, 1, 0.2}, 0.3, {0.6, -0.6, 0.2});
    const auto pair = synthetic::make_synthetic_pair(1500, truth, 0.02, 0.05, 14);
    IcpConfig cfg;
    const IcpResult base = align(pair.source, pair.target, cfg);
    for (nn::Backend b : {nn::Backend::naive, nn::Backend::kdtree}) {
        cfg.backend = b;
        const IcpResult r = align(pair.source, pair.target, cfg);
        EXPECT_EQ(r.final_transform, base.final_transform);
        EXPECT_EQ(r.iterations_run, base.iterations_run);
        EXPECT_EQ(r.fitness_rmse, base.fitness_rmse);
    }
}

TEST(Registration, InvalidConfigIsRejected) {
    const PointCloud c = synthetic::make_scene(100, 1);
    IcpConfig cfg;
    cfg.max_correspondence_distance = 0.0;
    EXPECT_THROW(align(c, c, cfg), ConfigError);
    cfg = {};
    cfg.max_iterations = 0;
    EXPECT_THROW(align(c, c, cfg), ConfigError);
    cfg = {};
    cfg.initial_transform = RigidTransform(Mat3::diagonal(1, 2, 1), {});
    EXPECT_THROW(align(c, c, cfg), InvalidTransformError);
    EXPECT_THROW(align(PointCloud{}, c), EmptyCloudError);
}

TEST(Registration, FarApartCloudsReportIteration) {
    const PointCloud src = synthetic::make_scene(200, 1);
    const PointCloud tgt = apply_transform(src, RigidTransform::from_translation({500, 0, 0}));
    try {
        align(src, tgt);
        FAIL();
    } catch (const DegenerateCorrespondenceError& e) {
        EXPECT_EQ(e.iteration(), 1u);
        EXPECT_EQ(e.surviving(), 0u);
    }
}
