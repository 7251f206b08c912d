#pragma once

#include <vector>

#include "hsi/common/image.hpp"

namespace hsi {

// Cross-attention heat maps at h x w for n tokens, stored pixel-major
// (values[(y * width + x) * tokens + k]). Each pixel's row sums to 1.
struct AttentionMap {
    int width = 16;
    int height = 16;
    int tokens = 0;
    std::vector<float> values;

    AttentionMap() = default;
    AttentionMap(int w, int h, int n) : width(w), height(h), tokens(n), values(static_cast<size_t>(w) * h * n, 0.0f) {}

    float& at(int x, int y, int k) { return values[(static_cast<size_t>(y) * width + x) * tokens + k]; }
    float at(int x, int y, int k) const { return values[(static_cast<size_t>(y) * width + x) * tokens + k]; }

    // Non-negative entries, rows summing to 1 within tol. Throws ValidationError.
    void validate(double tol = 1e-4) const;

    bool operator==(const AttentionMap&) const = default;
};

// Element-wise mean over layers of equal shape.
AttentionMap average_layers(const std::vector<AttentionMap>& layers);

// Sum of the selected tokens' heat maps, min-max normalized, bilinearly
// upsampled (pixel centers aligned) to out_w x out_h and binarized at
// value >= threshold. A constant map gives an empty mask.
Mask mask_from_attention(const AttentionMap& att, const std::vector<int>& token_indices, double threshold, int out_w,
                         int out_h);

}  // namespace hsi
