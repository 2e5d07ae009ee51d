#pragma once

#include <vector>

#include "mincseg/tensor.hpp"

namespace mincseg {

enum class ColorSpace { SrgbU8, LinearF32, LabF32 };

// Row-major, channel-interleaved raster. SrgbU8 keeps gamma-encoded values
// in [0,255] (stored as float so resampling stays exact); LabF32 is CIE
// L*a*b* under D65 with 0 <= L <= 100.
struct Image {
  int width = 0, height = 0, channels = 0;
  ColorSpace space = ColorSpace::SrgbU8;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, ColorSpace s, float fill = 0.0f)
      : width(w), height(h), channels(c), space(s),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  bool empty() const { return data.empty(); }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  float& at(int x, int y, int c) { return data[index(x, y, c)]; }
  float at(int x, int y, int c) const { return data[index(x, y, c)]; }
};

// Patch location in image-relative units: center as fractions of width and
// height, scale as a fraction of the smaller image dimension.
struct PatchGeometry {
  double center_x = 0.5;
  double center_y = 0.5;
  double scale = 0.233;
};

// Bilinear resampling with half-pixel sample centers (no corner alignment).
// Output values are convex combinations of input values; resizing to the
// input size reproduces the image bit for bit.
Image resize_bilinear(const Image& img, int out_w, int out_h);

// Resize so the smaller dimension equals `target`, aspect preserved, the
// larger dimension rounded half-up.
Image resize_to_smaller_dim(const Image& img, int target);

// sRGB (gamma-encoded, D65) to CIE L*a*b*.
Image rgb_to_lab(const Image& img);

// Square crop of side round(scale * min(W,H)) centered at the pixel-space
// center, edge-replicated where the square exits the image, then resized to
// out_size x out_size.
Image extract_patch(const Image& img, const PatchGeometry& geom, int out_size);

// 1x3xHxW tensor of per-channel mean-subtracted values (R-124, G-117, B-104).
Tensor preprocess(const Image& img);

Image mirror_horizontal(const Image& img);

}  // namespace mincseg
