// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "fieldfuse/image.hpp"

namespace fieldfuse {

/// 8-bit RGB PNG tagged sRGB. Values are clamped to [0, 1] and rounded.
void write_png(const std::filesystem::path& path, const ImageD& rgb);
/// Reads 8-bit grayscale/RGB(A) PNGs into a 3-channel image in [0, 1].
ImageD read_png(const std::filesystem::path& path);

/// 32-bit float PFM, little-endian (negative scale), rows stored bottom-up.
void write_pfm(const std::filesystem::path& path, const ImageD& image);
ImageD read_pfm(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fieldfuse
