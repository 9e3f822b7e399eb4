// SPDX-License-Identifier: Apache-2.0
#include "fieldfuse/io.hpp"

#include <png.h>

#include <csetjmp>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "fieldfuse/error.hpp"

namespace fieldfuse {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return f;
}

void png_warn(png_structp, png_const_charp) {}

// Keeps libpng's message for the exception instead of printing it.
struct PngMessage {
  char text[200] = "unknown error";
};

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* m = static_cast<PngMessage*>(png_get_error_ptr(png));
  if (m && msg) std::snprintf(m->text, sizeof m->text, "%s", msg);
  png_longjmp(png, 1);
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

}  // namespace

void write_png(const std::filesystem::path& path, const ImageD& rgb) {
  if (rgb.channels != 3 && rgb.channels != 1) throw Error(ErrorCode::InvalidArgument, "png export needs 1 or 3 channels");
  FilePtr file = open_file(path, "wb");
  PngMessage message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "png: out of memory");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(rgb.width) * 3);
  // libpng reports errors by longjmp; every local above outlives the jump.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "png: failed writing " + path.string() + ": " + message.text);
  }
  {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, rgb.width, rgb.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_write_info(png, info);
    for (int y = 0; y < rgb.height; ++y) {
      for (int x = 0; x < rgb.width; ++x) {
        for (int c = 0; c < 3; ++c) {
          const double v = rgb.at(x, y, rgb.channels == 3 ? c : 0);
          row[static_cast<std::size_t>(x) * 3 + c] =
              static_cast<png_byte>(std::lround(std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0) * 255.0));
        }
      }
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
  }
  png_destroy_write_struct(&png, &info);
}

ImageD read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  PngMessage message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Io, "png: out of memory");
  }
  ImageD out;
  std::vector<png_byte> row;
  volatile bool bad_layout = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Io, "png: failed reading " + path.string() + ": " + message.text);
  }
  {
    png_init_io(png, file.get());
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    if (png_get_rowbytes(png, info) != static_cast<std::size_t>(w) * 3) {
      bad_layout = true;
    } else {
      out = ImageD(w, h, 3);
      row.resize(static_cast<std::size_t>(w) * 3);
      for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int i = 0; i < w * 3; ++i) out.data[static_cast<std::size_t>(y) * w * 3 + i] = row[i] / 255.0;
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (bad_layout) throw Error(ErrorCode::Io, "png: unsupported pixel layout in " + path.string());
  return out;
}

void write_pfm(const std::filesystem::path& path, const ImageD& image) {
  if (image.channels != 1 && image.channels != 3) throw Error(ErrorCode::InvalidArgument, "pfm needs 1 or 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  out << (image.channels == 3 ? "PF" : "Pf") << "\n" << image.width << " " << image.height << "\n-1.0\n";
  std::vector<std::uint32_t> row(static_cast<std::size_t>(image.width) * image.channels);
  for (int y = image.height - 1; y >= 0; --y) {
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        const float f = static_cast<float>(image.at(x, y, c));
        row[static_cast<std::size_t>(x) * image.channels + c] = to_little_endian(std::bit_cast<std::uint32_t>(f));
      }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

ImageD read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if ((magic != "PF" && magic != "Pf") || w <= 0 || h <= 0 || scale == 0.0)
    throw Error(ErrorCode::Io, "malformed pfm header in " + path.string());
  const int channels = magic == "PF" ? 3 : 1;
  const bool little = scale < 0.0;
  ImageD img(w, h, channels);
  std::vector<std::uint32_t> row(static_cast<std::size_t>(w) * channels);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!in) throw Error(ErrorCode::Io, "truncated pfm " + path.string());
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::uint32_t bits = row[i];
      if (little != (std::endian::native == std::endian::little))
        bits = ((bits & 0xffu) << 24) | ((bits & 0xff00u) << 8) | ((bits >> 8) & 0xff00u) | (bits >> 24);
      img.data[static_cast<std::size_t>(y) * w * channels + i] = std::bit_cast<float>(bits);
    }
  }
  return img;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace fieldfuse
