#include <cmath>

#include "hsi/common/error.hpp"
#include "hsi/masking/attention.hpp"

namespace hsi {

void AttentionMap::validate(double tol) const {
    if (width <= 0 || height <= 0 || tokens <= 0) throw ValidationError("attention map: empty shape");
    if (values.size() != static_cast<size_t>(width) * height * tokens)
        throw ValidationError("attention map: value count does not match shape");
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double s = 0;
            for (int k = 0; k < tokens; ++k) {
                const float v = at(x, y, k);
                if (!(v >= 0.0f) || !std::isfinite(v)) throw ValidationError("attention map: negative or non-finite value");
                s += v;
            }
            if (std::abs(s - 1.0) > tol)
                throw ValidationError("attention map: row at (" + std::to_string(x) + ", " + std::to_string(y) +
                                      ") sums to " + std::to_string(s));
        }
}

AttentionMap average_layers(const std::vector<AttentionMap>& layers) {
    if (layers.empty()) throw ValidationError("attention: no layers");
    const AttentionMap& f = layers.front();
    std::vector<double> acc(f.values.size(), 0.0);
    for (const AttentionMap& l : layers) {
        if (l.width != f.width || l.height != f.height || l.tokens != f.tokens || l.values.size() != f.values.size())
            throw ValidationError("attention: layers differ in shape");
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += l.values[i];
    }
    AttentionMap out(f.width, f.height, f.tokens);
    for (size_t i = 0; i < acc.size(); ++i) out.values[i] = static_cast<float>(acc[i] / layers.size());
    return out;
}

Mask mask_from_attention(const AttentionMap& att, const std::vector<int>& token_indices, double threshold, int out_w,
                         int out_h) {
    if (token_indices.empty()) throw ValidationError("mask_from_attention: empty token set");
    for (int k : token_indices)
        if (k < 0 || k >= att.tokens) throw ValidationError("mask_from_attention: token index out of range");
    if (out_w <= 0 || out_h <= 0) throw ValidationError("mask_from_attention: bad output size");
    const int w = att.width, h = att.height;

    std::vector<double> s(static_cast<size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int k : token_indices) s[static_cast<size_t>(y) * w + x] += att.at(x, y, k);
    double lo = s[0], hi = s[0];
    for (double v : s) lo = std::min(lo, v), hi = std::max(hi, v);
    Mask out(out_w, out_h, 0);
    if (!(hi > lo)) return out;
    for (double& v : s) v = (v - lo) / (hi - lo);

    auto coord = [](int o, int src, int dst, int* i0, int* i1, double* f) {
        double u = (o + 0.5) * src / dst - 0.5;
        u = std::clamp(u, 0.0, static_cast<double>(src - 1));
        *i0 = static_cast<int>(std::floor(u));
        *i1 = std::min(*i0 + 1, src - 1);
        *f = u - *i0;
    };
    for (int oy = 0; oy < out_h; ++oy) {
        int y0, y1;
        double fy;
        coord(oy, h, out_h, &y0, &y1, &fy);
        for (int ox = 0; ox < out_w; ++ox) {
            int x0, x1;
            double fx;
            coord(ox, w, out_w, &x0, &x1, &fx);
            auto S = [&](int x, int y) { return s[static_cast<size_t>(y) * w + x]; };
            const double v = (1 - fy) * ((1 - fx) * S(x0, y0) + fx * S(x1, y0)) + fy * ((1 - fx) * S(x0, y1) + fx * S(x1, y1));
            out(ox, oy) = v >= threshold ? 1 : 0;
        }
    }
    return out;
}

}  // namespace hsi
