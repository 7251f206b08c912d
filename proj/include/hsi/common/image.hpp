#pragma once

#include <cstdint>
#include <vector>

namespace hsi {

// Row-major single-channel image. Pixel (x, y) covers [x, x+1) x [y, y+1).
template <class T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    T& operator()(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const T& operator()(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
    bool empty() const { return data.empty(); }

    bool operator==(const Image&) const = default;
};

// Binary mask: 0 or 1 per pixel.
using Mask = Image<std::uint8_t>;

inline size_t count_set(const Mask& m) {
    size_t n = 0;
    for (auto v : m.data) n += v != 0;
    return n;
}

}  // namespace hsi
