#include "mitodet/png_io.hpp"

#include <png.h>

#include <cstring>
#include <vector>

#include "mitodet/fsio.hpp"

namespace mitodet {

namespace {

struct PngReadCtx {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->offset + count > ctx->size)
        png_error(png, "unexpected end of PNG data");
    std::memcpy(out, ctx->data + ctx->offset, count);
    ctx->offset += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
    auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    buf->insert(buf->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

std::vector<std::uint8_t> encode_rows(const std::uint8_t* base, int width, int height,
                                      int channels, int color_type) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw InternalError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw InternalError("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw InternalError("PNG encode failed");
    }

    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(base + static_cast<std::size_t>(y) * width * channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

Raster read_png(const std::filesystem::path& path) {
    const std::string bytes = read_text_file(path);
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8))
        throw BadInput("'" + path.string() + "' is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw InternalError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw InternalError("png_create_info_struct failed");
    }

    PngReadCtx ctx{reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size(), 0};
    Raster img;
    std::vector<png_bytep> row_ptrs;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw BadInput("cannot decode PNG '" + path.string() + "'");
    }

    png_set_read_fn(png, &ctx, png_read_from_memory);
    png_read_info(png, info);

    // normalize everything to 8-bit RGB
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw BadInput("unexpected channel count in '" + path.string() + "'");
    }

    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.rgb.resize(3 * static_cast<std::size_t>(width) * height);
    row_ptrs.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        row_ptrs[y] = img.rgb.data() + 3 * static_cast<std::size_t>(y) * width;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_png(const std::filesystem::path& path, const Raster& image) {
    if (image.width < 1 || image.height < 1 || image.rgb.size() != 3u * image.width * image.height)
        throw BadInput("write_png: malformed raster");
    atomic_write_file(path,
                      encode_rows(image.rgb.data(), image.width, image.height, 3, PNG_COLOR_TYPE_RGB));
}

void write_png(const std::filesystem::path& path, const BinaryMask& mask) {
    if (mask.width < 1 || mask.height < 1 || mask.values.size() != static_cast<std::size_t>(mask.width) * mask.height)
        throw BadInput("write_png: malformed mask");
    std::vector<std::uint8_t> gray(mask.values.size());
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.values[i] ? 255 : 0;
    atomic_write_file(path, encode_rows(gray.data(), mask.width, mask.height, 1, PNG_COLOR_TYPE_GRAY));
}

BinaryMask read_mask_png(const std::filesystem::path& path) {
    const Raster img = read_png(path);
    BinaryMask mask = BinaryMask::zeros(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            mask.at(x, y) = img.pixel(x, y)[0] >= 128 ? 1 : 0;
    return mask;
}

}  // namespace mitodet
