#pragma once

#include <cstdint>
#include <limits>

#include "hsi/common/image.hpp"
#include "hsi/scene/camera.hpp"
#include "hsi/scene/mesh.hpp"

namespace hsi {

inline constexpr float kEmptyDepth = std::numeric_limits<float>::infinity();

struct RasterResult {
    Image<float> depth;            // nearest camera-space Z per pixel, kEmptyDepth if uncovered
    Mask silhouette;               // 1 where depth is finite
    Image<std::int32_t> face_id;   // -1 if uncovered
};

// Z-buffered rasterization at the camera resolution, sampling pixel centers.
// Triangles are clipped against a near plane just in front of the camera.
RasterResult rasterize(const TriMesh& mesh, const Camera& camera);

// Morphological dilation with a kernel x kernel square. Throws ValidationError
// for even or non-positive kernels.
Mask dilate_mask(const Mask& mask, int kernel);

}  // namespace hsi
