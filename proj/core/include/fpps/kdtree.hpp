#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fpps/geometry.hpp"
#include "fpps/nn_engine.hpp"

namespace fpps::nn {

/// Balanced 3-d tree used as an exact-search oracle and for latency
/// comparison against the brute-force kernel.
///
/// Built by median split with axes cycling x, y, z. Points are ordered by
/// (coordinate, index) so the build is fully deterministic; the upper median
/// of each range becomes the node.
class KdTree {
public:
    static constexpr std::int32_t kNull = -1;

    struct Node {
        Point3 point;
        std::size_t index;  // position in the source cloud
        std::int32_t left = kNull;
        std::int32_t right = kNull;
        std::uint8_t axis = 0;
    };

    struct Hit {
        std::size_t target_index = kNoIndex;
        double squared_distance = std::numeric_limits<double>::infinity();

        friend bool operator==(const Hit&, const Hit&) = default;
    };

    /// Throws EmptyCloudError.
    explicit KdTree(const PointCloud& target);

    /// Exact nearest neighbour with backtracking. Ties go to the smaller
    /// target index, matching the brute-force kernel.
    Hit nearest(const Point3& query) const;

    std::size_t size() const noexcept { return nodes_.size(); }
    /// Edges on the longest root-to-leaf path; a single point has depth 0.
    std::size_t depth() const noexcept { return depth_; }
    std::int32_t root() const noexcept { return nodes_.empty() ? kNull : 0; }
    std::span<const Node> nodes() const noexcept { return nodes_; }

private:
    std::int32_t build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi,
                       std::size_t level, const PointCloud& target);
    void search(std::int32_t node, const Point3& query, Hit& best) const;

    std::vector<Node> nodes_;
    std::size_t depth_ = 0;
};

KdTree kdtree_build(const PointCloud& target);
KdTree::Hit kdtree_nn(const KdTree& tree, const Point3& query);
/// kdtree_nn for every source point, in source order.
std::vector<NnResult> kdtree_nn(const KdTree& tree, const PointCloud& source);

}  // namespace fpps::nn
