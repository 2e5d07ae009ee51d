#include "mincseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mincseg/common.hpp"

namespace mincseg {

namespace {

// sRGB -> XYZ, D65 reference white.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kWhiteX = 0.4124564 + 0.3575761 + 0.1804375;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 0.0193339 + 0.1191920 + 0.9503041;

constexpr double kLabEps = 216.0 / 24389.0;   // (6/29)^3
constexpr double kLabKappa = 24389.0 / 27.0;  // (29/3)^3

double srgb_decode(double u) {
  return u <= 0.04045 ? u / 12.92 : std::pow((u + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  return t > kLabEps ? std::cbrt(t) : (kLabKappa * t + 16.0) / 116.0;
}

constexpr float kMean[3] = {124.0f, 117.0f, 104.0f};

}  // namespace

Image resize_bilinear(const Image& img, int out_w, int out_h) {
  if (img.empty()) throw std::invalid_argument("resize_bilinear: empty image");
  if (out_w < 1 || out_h < 1) throw std::invalid_argument("resize_bilinear: zero-sized target");

  Image out(out_w, out_h, img.channels, img.space);
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    double fy = clamp((oy + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, img.height - 1);
    double wy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double fx = clamp((ox + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, img.width - 1);
      double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        double top = (1.0 - wx) * img.at(x0, y0, c) + wx * img.at(x1, y0, c);
        double bot = (1.0 - wx) * img.at(x0, y1, c) + wx * img.at(x1, y1, c);
        out.at(ox, oy, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

Image resize_to_smaller_dim(const Image& img, int target) {
  if (target < 1) throw std::invalid_argument("resize_to_smaller_dim: target < 1");
  int w, h;
  if (img.width <= img.height) {
    w = target;
    h = std::max(1, round_half_up(static_cast<double>(img.height) * target / img.width));
  } else {
    h = target;
    w = std::max(1, round_half_up(static_cast<double>(img.width) * target / img.height));
  }
  return resize_bilinear(img, w, h);
}

Image rgb_to_lab(const Image& img) {
  if (img.channels != 3) throw std::invalid_argument("rgb_to_lab: expected 3 channels");

  Image out(img.width, img.height, 3, ColorSpace::LabF32);
  const std::size_t npix = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < npix; ++i) {
    double r = srgb_decode(img.data[i * 3 + 0] / 255.0);
    double g = srgb_decode(img.data[i * 3 + 1] / 255.0);
    double b = srgb_decode(img.data[i * 3 + 2] / 255.0);
    double x = kRgbToXyz[0][0] * r + kRgbToXyz[0][1] * g + kRgbToXyz[0][2] * b;
    double y = kRgbToXyz[1][0] * r + kRgbToXyz[1][1] * g + kRgbToXyz[1][2] * b;
    double z = kRgbToXyz[2][0] * r + kRgbToXyz[2][1] * g + kRgbToXyz[2][2] * b;
    double fx = lab_f(x / kWhiteX);
    double fy = lab_f(y / kWhiteY);
    double fz = lab_f(z / kWhiteZ);
    out.data[i * 3 + 0] = static_cast<float>(116.0 * fy - 16.0);
    out.data[i * 3 + 1] = static_cast<float>(500.0 * (fx - fy));
    out.data[i * 3 + 2] = static_cast<float>(200.0 * (fy - fz));
  }
  return out;
}

Image extract_patch(const Image& img, const PatchGeometry& geom, int out_size) {
  if (img.empty()) throw std::invalid_argument("extract_patch: empty image");
  if (out_size < 1) throw std::invalid_argument("extract_patch: out_size < 1");
  const int side = round_half_up(geom.scale * std::min(img.width, img.height));
  if (side < 1) throw std::invalid_argument("extract_patch: patch side below one pixel");

  const double cx = geom.center_x * img.width;
  const double cy = geom.center_y * img.height;
  const int x0 = round_half_up(cx - side / 2.0);
  const int y0 = round_half_up(cy - side / 2.0);

  Image crop(side, side, img.channels, img.space);
  for (int y = 0; y < side; ++y) {
    int sy = clamp_int(y0 + y, 0, img.height - 1);
    for (int x = 0; x < side; ++x) {
      int sx = clamp_int(x0 + x, 0, img.width - 1);
      for (int c = 0; c < img.channels; ++c) crop.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return resize_bilinear(crop, out_size, out_size);
}

Tensor preprocess(const Image& img) {
  if (img.channels != 3) throw std::invalid_argument("preprocess: expected 3 channels");
  Tensor t(1, 3, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) t.at(0, c, y, x) = img.at(x, y, c) - kMean[c];
  return t;
}

Image mirror_horizontal(const Image& img) {
  Image out(img.width, img.height, img.channels, img.space);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(x, y, c) = img.at(img.width - 1 - x, y, c);
  return out;
}

}  // namespace mincseg
