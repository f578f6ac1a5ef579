#include "fpps/kdtree.hpp"

#include <algorithm>
#include <numeric>

#include "fpps/error.hpp"

namespace fpps::nn {

KdTree::KdTree(const PointCloud& target) {
    if (target.empty()) throw EmptyCloudError("cannot build a k-d tree over an empty cloud");
    nodes_.reserve(target.size());
    std::vector<std::size_t> order(target.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    build(order, 0, order.size(), 0, target);
}

std::int32_t KdTree::build(std::vector<std::size_t>& order, std::size_t lo, std::size_t hi,
                           std::size_t level, const PointCloud& target) {
    if (lo >= hi) return kNull;
    depth_ = std::max(depth_, level);
    const int axis = static_cast<int>(level % 3);
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(first, order.begin() + static_cast<std::ptrdiff_t>(mid),
                     order.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) {
                         const double ca = target[a][axis], cb = target[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });

    const auto id = static_cast<std::int32_t>(nodes_.size());
    const std::size_t index = order[mid];
    nodes_.push_back(Node{target[index], index, kNull, kNull, static_cast<std::uint8_t>(axis)});
    const std::int32_t left = build(order, lo, mid, level + 1, target);
    const std::int32_t right = build(order, mid + 1, hi, level + 1, target);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

void KdTree::search(std::int32_t id, const Point3& query, Hit& best) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const double d = squared_distance(node.point, query);
    if (improves(d, node.index, best.squared_distance, best.target_index)) {
        best = Hit{node.index, d};
    }

    const double diff = query[node.axis] - node.point[node.axis];
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    if (near != kNull) search(near, query, best);
    // Any far-side point is at least |diff| away along this axis, and the
    // rounded distance is monotone in that component. Equality must still be
    // visited: a far point at the same distance may carry a smaller index.
    if (far != kNull && diff * diff <= best.squared_distance) search(far, query, best);
}

KdTree::Hit KdTree::nearest(const Point3& query) const {
    Hit best;
    search(root(), query, best);
    return best;
}

KdTree kdtree_build(const PointCloud& target) { return KdTree(target); }

KdTree::Hit kdtree_nn(const KdTree& tree, const Point3& query) { return tree.nearest(query); }

std::vector<NnResult> kdtree_nn(const KdTree& tree, const PointCloud& source) {
    std::vector<NnResult> out(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        const KdTree::Hit hit = tree.nearest(source[i]);
        out[i] = NnResult{i, hit.target_index, hit.squared_distance};
    }
    return out;
}

}  // namespace fpps::nn
