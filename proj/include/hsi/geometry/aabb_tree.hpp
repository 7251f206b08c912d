#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "hsi/geometry/aabb.hpp"

namespace hsi {

// Static bounding-volume hierarchy over primitive boxes. Built top-down with a
// median split on the longest axis of the centroid bounds; deterministic.
class AabbTree {
public:
    static constexpr int kLeafSize = 4;

    struct Node {
        Aabb box;
        std::int32_t left = -1;   // child indices, -1 for leaves
        std::int32_t right = -1;
        std::uint32_t begin = 0;  // range into order() for leaves
        std::uint32_t end = 0;
        bool leaf() const { return left < 0; }
    };

    AabbTree() = default;
    explicit AabbTree(std::vector<Aabb> prim_boxes);

    bool empty() const { return nodes_.empty(); }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::uint32_t>& order() const { return order_; }
    const Aabb& prim_box(std::uint32_t i) const { return boxes_[i]; }

    template <class Visit>
    void query_overlap(const Aabb& q, Visit&& visit) const {
        if (nodes_.empty()) return;
        std::vector<std::int32_t> stack{0};
        while (!stack.empty()) {
            const Node& n = nodes_[stack.back()];
            stack.pop_back();
            if (!n.box.overlaps(q)) continue;
            if (n.leaf()) {
                for (auto k = n.begin; k < n.end; ++k)
                    if (boxes_[order_[k]].overlaps(q)) visit(order_[k]);
            } else {
                stack.push_back(n.right);
                stack.push_back(n.left);
            }
        }
    }

    // Nearest primitive under a caller-supplied squared distance. Returns the
    // primitive index (or -1 when empty) and writes the best squared distance.
    template <class SqDist>
    std::int64_t nearest(const Vec3& p, SqDist&& sqdist, double* best_out = nullptr) const {
        double best = std::numeric_limits<double>::infinity();
        std::int64_t best_idx = -1;
        if (!nodes_.empty()) nearest_rec(0, p, sqdist, best, best_idx);
        if (best_out) *best_out = best;
        return best_idx;
    }

    // Visits every unordered primitive pair (i, j), i != j, whose boxes overlap.
    template <class Visit>
    void self_pairs(Visit&& visit) const {
        if (!nodes_.empty()) self_rec(0, 0, visit);
    }

private:
    std::int32_t build_rec(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids);

    template <class SqDist>
    void nearest_rec(std::int32_t ni, const Vec3& p, SqDist& sqdist, double& best,
                     std::int64_t& best_idx) const {
        const Node& n = nodes_[ni];
        if (n.box.squared_distance(p) > best) return;
        if (n.leaf()) {
            for (auto k = n.begin; k < n.end; ++k) {
                const double d = sqdist(order_[k]);
                if (d < best) {
                    best = d;
                    best_idx = order_[k];
                }
            }
            return;
        }
        const double dl = nodes_[n.left].box.squared_distance(p);
        const double dr = nodes_[n.right].box.squared_distance(p);
        if (dl <= dr) {
            nearest_rec(n.left, p, sqdist, best, best_idx);
            nearest_rec(n.right, p, sqdist, best, best_idx);
        } else {
            nearest_rec(n.right, p, sqdist, best, best_idx);
            nearest_rec(n.left, p, sqdist, best, best_idx);
        }
    }

    template <class Visit>
    void self_rec(std::int32_t a, std::int32_t b, Visit& visit) const {
        const Node& na = nodes_[a];
        const Node& nb = nodes_[b];
        if (a == b) {
            if (na.leaf()) {
                for (auto i = na.begin; i < na.end; ++i)
                    for (auto j = i + 1; j < na.end; ++j)
                        if (boxes_[order_[i]].overlaps(boxes_[order_[j]])) visit(order_[i], order_[j]);
                return;
            }
            self_rec(na.left, na.left, visit);
            self_rec(na.right, na.right, visit);
            self_rec(na.left, na.right, visit);
            return;
        }
        if (!na.box.overlaps(nb.box)) return;
        if (na.leaf() && nb.leaf()) {
            for (auto i = na.begin; i < na.end; ++i)
                for (auto j = nb.begin; j < nb.end; ++j)
                    if (boxes_[order_[i]].overlaps(boxes_[order_[j]])) visit(order_[i], order_[j]);
            return;
        }
        const bool split_a = nb.leaf() || (!na.leaf() && na.box.extent().squaredNorm() >= nb.box.extent().squaredNorm());
        if (split_a) {
            self_rec(na.left, b, visit);
            self_rec(na.right, b, visit);
        } else {
            self_rec(a, nb.left, visit);
            self_rec(a, nb.right, visit);
        }
    }

    std::vector<Aabb> boxes_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace hsi
