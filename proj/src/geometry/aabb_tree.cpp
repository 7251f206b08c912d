#include "hsi/geometry/aabb_tree.hpp"

#include <algorithm>
#include <numeric>

namespace hsi {

AabbTree::AabbTree(std::vector<Aabb> prim_boxes) : boxes_(std::move(prim_boxes)) {
    if (boxes_.empty()) return;
    order_.resize(boxes_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::vector<Vec3> centroids(boxes_.size());
    for (size_t i = 0; i < boxes_.size(); ++i) centroids[i] = boxes_[i].center();
    nodes_.reserve(2 * boxes_.size() / kLeafSize + 2);
    build_rec(0, static_cast<std::uint32_t>(boxes_.size()), centroids);
}

std::int32_t AabbTree::build_rec(std::uint32_t begin, std::uint32_t end, std::vector<Vec3>& centroids) {
    const auto idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box, cbox;
    for (auto k = begin; k < end; ++k) {
        box.extend(boxes_[order_[k]]);
        cbox.extend(centroids[order_[k]]);
    }
    nodes_[idx].box = box;
    if (end - begin <= static_cast<std::uint32_t>(kLeafSize)) {
        nodes_[idx].begin = begin;
        nodes_[idx].end = end;
        return idx;
    }
    const int axis = cbox.longest_axis();
    const std::uint32_t mid = begin + (end - begin) / 2;
    // Ties broken by index so the tree does not depend on nth_element internals.
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         if (centroids[a][axis] != centroids[b][axis]) return centroids[a][axis] < centroids[b][axis];
                         return a < b;
                     });
    const auto left = build_rec(begin, mid, centroids);
    const auto right = build_rec(mid, end, centroids);
    nodes_[idx].left = left;
    nodes_[idx].right = right;
    return idx;
}

}  // namespace hsi
