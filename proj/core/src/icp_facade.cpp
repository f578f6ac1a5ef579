#include "fpps/icp_facade.hpp"

#include <string>
#include <utility>

#include "fpps/error.hpp"

namespace fpps {

IterativeClosestPoint& IterativeClosestPoint::hardwareInitialize() {
    backend_ = nn::backend_from_environment();
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::hardwareInitialize(nn::Backend backend) {
    backend_ = backend;
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::hardwareInitialize(std::string_view backend) {
    backend_ = nn::parse_backend(backend);
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setInputSource(PointCloud source) {
    source_ = std::move(source);
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setInputTarget(PointCloud target) {
    target_ = std::move(target);
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setTransformationMatrix(const RigidTransform& initial) {
    initial.validate();
    cfg_.initial_transform = initial;
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setMaxCorrespondenceDistance(double distance) {
    if (!(distance > 0.0)) throw ConfigError("max correspondence distance must be positive");
    cfg_.max_correspondence_distance = distance;
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setMaxIterationCount(std::size_t iterations) {
    if (iterations == 0) throw ConfigError("max iteration count must be at least 1");
    cfg_.max_iterations = iterations;
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setTransformationEpsilon(double epsilon) {
    if (!(epsilon >= 0.0)) throw ConfigError("transformation epsilon must be non-negative");
    cfg_.transformation_epsilon = epsilon;
    return *this;
}

IterativeClosestPoint& IterativeClosestPoint::setTileConfig(const nn::TileConfig& tile) {
    tile.validate();
    cfg_.tile = tile;
    return *this;
}

nn::Backend IterativeClosestPoint::backend() const {
    return backend_ ? *backend_ : nn::backend_from_environment();
}

IcpConfig IterativeClosestPoint::config() const {
    IcpConfig cfg = cfg_;
    cfg.backend = backend();
    return cfg;
}

IcpResult IterativeClosestPoint::align() {
    std::string missing;
    if (!source_) missing += "inputSource";
    if (!target_) missing += missing.empty() ? "inputTarget" : ", inputTarget";
    if (!missing.empty()) {
        throw ConfigError("align() called before configuration; missing: " + missing);
    }
    last_ = fpps::align(*source_, *target_, config());
    return *last_;
}

RigidTransform IterativeClosestPoint::getFinalTransformation() const {
    return last_ ? last_->final_transform : RigidTransform::identity();
}

bool IterativeClosestPoint::hasConverged() const { return last_ && last_->converged; }

}  // namespace fpps
