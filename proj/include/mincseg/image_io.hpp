#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mincseg/image.hpp"

namespace mincseg {

// 8-bit PNG. Reading accepts RGB and grayscale files (palette and 16-bit
// inputs are expanded/stripped to 8-bit); the result is SrgbU8 with 3 or 1
// channels. Writing rounds to bytes and emits RGB or grayscale depending on
// the channel count.
Image read_png(const std::string& path);
void write_png(const std::string& path, const Image& img);

// Raw grayscale payloads (label index rasters).
void write_gray_png(const std::string& path, const std::vector<std::uint8_t>& pixels,
                    int width, int height);
std::vector<std::uint8_t> read_gray_png(const std::string& path, int* width, int* height);

// Binary PPM (P6), 8-bit RGB.
Image read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Image& img);

// Dispatches on the file extension (.png / .ppm).
Image read_image(const std::string& path);
void write_image(const std::string& path, const Image& img);

}  // namespace mincseg
