#pragma once

#include <string>

#include "hsi/common/image.hpp"
#include "hsi/scene/camera.hpp"
#include "hsi/scene/mesh.hpp"

namespace hsi {

// 1-bit grayscale PNG; set pixels are white.
void save_mask_png(const Mask& mask, const std::string& path);
Mask load_mask_png(const std::string& path);

// Rasterized silhouette dilated with a kernel x kernel square.
Mask silhouette_mask(const TriMesh& body, const Camera& camera, int kernel = 11);

}  // namespace hsi
