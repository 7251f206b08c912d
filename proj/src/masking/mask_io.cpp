#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

#include "hsi/common/error.hpp"
#include "hsi/masking/mask_io.hpp"
#include "hsi/scene/raster.hpp"

namespace hsi {

namespace {

// Kept free of C++ objects: libpng reports errors by longjmp.
bool write_png(std::FILE* fp, const Mask& mask, png_byte* row, size_t stride) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        return false;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        return false;
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < mask.height; ++y) {
        std::memset(row, 0, stride);
        for (int x = 0; x < mask.width; ++x)
            if (mask(x, y)) row[x / 8] |= static_cast<png_byte>(0x80 >> (x % 8));
        png_write_row(png, row);
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return true;
}

}  // namespace

void save_mask_png(const Mask& mask, const std::string& path) {
    if (mask.width <= 0 || mask.height <= 0) throw ValidationError("save_mask_png: empty mask");
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot write " + path);
    std::vector<png_byte> row((mask.width + 7) / 8);
    if (!write_png(fp.get(), mask, row.data(), row.size())) throw IoError("failed writing " + path);
}

Mask load_mask_png(const std::string& path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw IoError("cannot read PNG " + path + ": " + img.message);
    img.format = PNG_FORMAT_GRAY;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        png_image_free(&img);
        throw IoError("cannot decode PNG " + path + ": " + img.message);
    }
    Mask m(static_cast<int>(img.width), static_cast<int>(img.height), 0);
    for (size_t i = 0; i < m.data.size(); ++i) m.data[i] = buf[i] >= 128 ? 1 : 0;
    return m;
}

Mask silhouette_mask(const TriMesh& body, const Camera& camera, int kernel) {
    return dilate_mask(rasterize(body, camera).silhouette, kernel);
}

}  // namespace hsi
