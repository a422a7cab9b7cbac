#pragma once

#include <filesystem>

#include "mitodet/core.hpp"

namespace mitodet {

// Decodes any libpng-readable PNG (gray, palette, 16-bit, alpha) into an
// 8-bit RGB raster.
Raster read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Raster& image);

// Mask files are written as 8-bit grayscale, foreground = 255.
void write_png(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask_png(const std::filesystem::path& path);

}  // namespace mitodet
