#include "mincseg/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

#include "mincseg/common.hpp"

namespace mincseg {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(round_half_up(clamp(v, 0.0, 255.0)));
}

std::vector<std::uint8_t> decode_png(const std::string& path, int* w, int* h, int* channels) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_byte color_type = png_get_color_type(png, info);
  png_byte bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  *w = static_cast<int>(png_get_image_width(png, info));
  *h = static_cast<int>(png_get_image_height(png, info));
  *channels = static_cast<int>(png_get_channels(png, info));
  if (*channels != 1 && *channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path + ": unsupported channel count after expansion");
  }

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(*w) * *h * *channels);
  std::vector<png_bytep> rows(*h);
  for (int y = 0; y < *h; ++y)
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * *w * *channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return pixels;
}

void encode_png(const std::string& path, const std::uint8_t* pixels, int w, int h, int channels) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

Image read_png(const std::string& path) {
  int w, h, c;
  std::vector<std::uint8_t> pixels = decode_png(path, &w, &h, &c);
  Image img(w, h, c, ColorSpace::SrgbU8);
  for (std::size_t i = 0; i < pixels.size(); ++i) img.data[i] = pixels[i];
  return img;
}

void write_png(const std::string& path, const Image& img) {
  if (img.empty()) throw std::invalid_argument("write_png: empty image");
  if (img.channels != 1 && img.channels != 3)
    throw std::invalid_argument("write_png: channel count must be 1 or 3");
  std::vector<std::uint8_t> pixels(img.data.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(img.data[i]);
  encode_png(path, pixels.data(), img.width, img.height, img.channels);
}

void write_gray_png(const std::string& path, const std::vector<std::uint8_t>& pixels,
                    int width, int height) {
  if (pixels.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("write_gray_png: size mismatch");
  encode_png(path, pixels.data(), width, height, 1);
}

std::vector<std::uint8_t> read_gray_png(const std::string& path, int* width, int* height) {
  int c;
  std::vector<std::uint8_t> pixels = decode_png(path, width, height, &c);
  if (c != 1) throw std::runtime_error(path + ": expected a single-channel PNG");
  return pixels;
}

Image read_ppm(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open " + path);

  auto next_token = [&]() -> std::string {
    std::string tok;
    int ch;
    while ((ch = std::fgetc(fp.get())) != EOF) {
      if (ch == '#') {
        while ((ch = std::fgetc(fp.get())) != EOF && ch != '\n') {
        }
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
    return tok;
  };

  if (next_token() != "P6") throw std::runtime_error(path + ": not a binary PPM (P6)");
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (w < 1 || h < 1 || maxval != 255)
    throw std::runtime_error(path + ": unsupported PPM header");

  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(w) * h * 3);
  if (std::fread(pixels.data(), 1, pixels.size(), fp.get()) != pixels.size())
    throw std::runtime_error(path + ": truncated PPM payload");

  Image img(w, h, 3, ColorSpace::SrgbU8);
  for (std::size_t i = 0; i < pixels.size(); ++i) img.data[i] = pixels[i];
  return img;
}

void write_ppm(const std::string& path, const Image& img) {
  if (img.channels != 3) throw std::invalid_argument("write_ppm: expected 3 channels");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(fp.get(), "P6\n%d %d\n255\n", img.width, img.height);
  std::vector<std::uint8_t> pixels(img.data.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = to_byte(img.data[i]);
  if (std::fwrite(pixels.data(), 1, pixels.size(), fp.get()) != pixels.size())
    throw std::runtime_error("short write to " + path);
}

Image read_image(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ppm") == 0) return read_ppm(path);
  return read_png(path);
}

void write_image(const std::string& path, const Image& img) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".ppm") == 0)
    write_ppm(path, img);
  else
    write_png(path, img);
}

}  // namespace mincseg
