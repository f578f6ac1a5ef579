#include <gtest/gtest.h>

#include <cstdlib>
#include <numbers>

#include "fpps/error.hpp"
#include "fpps/icp_facade.hpp"
#include "fpps/synthetic.hpp"

using namespace fpps;

TEST(Facade, AlignBeforeConfigurationNamesMissingInputs) {
    IterativeClosestPoint icp;
    try {
        icp.align();
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("inputSource"), std::string::npos);
        EXPECT_NE(msg.find("inputTarget"), std::string::npos);
    }
    icp.setInputSource(synthetic::make_scene(50, 1));
    try {
        icp.align();
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_EQ(msg.find("inputSource"), std::string::npos);
        EXPECT_NE(msg.find("inputTarget"), std::string::npos);
    }
}

TEST(Facade, ChainedSettersMatchFreeFunction) {
    const auto truth = RigidTransform::from_axis_angle({0, 0, 1}, 0.2, {0.4, 0.1, 0});
    const auto pair = synthetic::make_synthetic_pair(1200, truth, 0.01, 0.0, 5);
    IterativeClosestPoint icp;
    const IcpResult r = icp.hardwareInitialize("kdtree")
                            .setInputSource(pair.source)
                            .setInputTarget(pair.target)
                            .setMaxCorrespondenceDistance(1.0)
                            .setMaxIterationCount(50)
                            .setTransformationEpsilon(1e-5)
                            .align();
    IcpConfig cfg;
    const IcpResult want = align(pair.source, pair.target, cfg);
    EXPECT_EQ(r.final_transform, want.final_transform);
    EXPECT_EQ(icp.getFinalTransformation(), want.final_transform);
    EXPECT_EQ(icp.hasConverged(), want.converged);
    EXPECT_EQ(icp.backend(), nn::Backend::kdtree);
}

TEST(Facade, DefaultParameters) {
    ::unsetenv("FPPS_BACKEND");
    IterativeClosestPoint icp;
    const IcpConfig c = icp.config();
    EXPECT_EQ(c.max_correspondence_distance, 1.0);
    EXPECT_EQ(c.max_iterations, 50u);
    EXPECT_EQ(c.transformation_epsilon, 1e-5);
    EXPECT_EQ(icp.backend(), nn::Backend::parallel);
    EXPECT_EQ(icp.getFinalTransformation(), RigidTransform::identity());
    EXPECT_FALSE(icp.hasConverged());
}

TEST(Facade, HardwareInitializeReadsEnvironment) {
    ::setenv("FPPS_BACKEND", "naive", 1);
    IterativeClosestPoint icp;
    icp.hardwareInitialize();
    EXPECT_EQ(icp.backend(), nn::Backend::naive);
    ::setenv("FPPS_BACKEND", "bogus", 1);
    IterativeClosestPoint bad;
    EXPECT_THROW(bad.hardwareInitialize(), ConfigError);
    ::unsetenv("FPPS_BACKEND");
    EXPECT_THROW(IterativeClosestPoint().hardwareInitialize("fpga"), ConfigError);
}

TEST(Facade, SettersValidate) {
    IterativeClosestPoint icp;
    EXPECT_THROW(icp.setMaxCorrespondenceDistance(-1.0), ConfigError);
    EXPECT_THROW(icp.setMaxIterationCount(0), ConfigError);
    EXPECT_THROW(icp.setTransformationEpsilon(-1.0), ConfigError);
    EXPECT_THROW(icp.setTransformationMatrix(RigidTransform(Mat3::diagonal(1, 1, -1), {})),
                 InvalidTransformError);
}

TEST(Facade, InitialGuessBreaksCubeSymmetry) {
    // The corners of a centred cube map onto themselves under a quarter turn,
    // so ICP started there stays put: the guess decides the answer.
    PointCloud cube;
    for (int x : {-1, 1})
        for (int y : {-1, 1})
            for (int z : {-1, 1}) cube.points.push_back({double(x), double(y), double(z)});
    const auto quarter = RigidTransform::from_axis_angle({0, 0, 1}, std::numbers::pi / 2);
    IterativeClosestPoint icp;
    icp.setInputSource(cube).setInputTarget(cube).setTransformationMatrix(quarter);
    const IcpResult r = icp.align();
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.final_transform.rotation_angle(), std::numbers::pi / 2, 1e-9);
    EXPECT_NEAR(r.fitness_rmse, 0.0, 1e-12);
}
