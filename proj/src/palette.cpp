#include "mincseg/palette.hpp"

#include <cmath>
#include <cstring>

#include "mincseg/annotations.hpp"

namespace mincseg {

namespace {

Rgb hsv_to_rgb(double h, double s, double v) {
  double r, g, b;
  int i = static_cast<int>(h * 6.0) % 6;
  double f = h * 6.0 - std::floor(h * 6.0);
  double p = v * (1.0 - s);
  double q = v * (1.0 - f * s);
  double t = v * (1.0 - (1.0 - f) * s);
  switch (i) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
  return {static_cast<std::uint8_t>(r * 255.0 + 0.5), static_cast<std::uint8_t>(g * 255.0 + 0.5),
          static_cast<std::uint8_t>(b * 255.0 + 0.5)};
}

constexpr int kOtherCategory = 11;

// 5x7 bitmap glyphs, column bytes, LSB at the top row. Lowercase letters
// plus space and period cover the category names.
struct Glyph {
  char ch;
  std::uint8_t cols[5];
};

constexpr Glyph kFont[] = {
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00}}, {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
    {'a', {0x20, 0x54, 0x54, 0x54, 0x78}}, {'b', {0x7F, 0x48, 0x44, 0x44, 0x38}},
    {'c', {0x38, 0x44, 0x44, 0x44, 0x20}}, {'d', {0x38, 0x44, 0x44, 0x48, 0x7F}},
    {'e', {0x38, 0x54, 0x54, 0x54, 0x18}}, {'f', {0x08, 0x7E, 0x09, 0x01, 0x02}},
    {'g', {0x0C, 0x52, 0x52, 0x52, 0x3E}}, {'h', {0x7F, 0x08, 0x04, 0x04, 0x78}},
    {'i', {0x00, 0x44, 0x7D, 0x40, 0x00}}, {'j', {0x20, 0x40, 0x44, 0x3D, 0x00}},
    {'k', {0x7F, 0x10, 0x28, 0x44, 0x00}}, {'l', {0x00, 0x41, 0x7F, 0x40, 0x00}},
    {'m', {0x7C, 0x04, 0x18, 0x04, 0x78}}, {'n', {0x7C, 0x08, 0x04, 0x04, 0x78}},
    {'o', {0x38, 0x44, 0x44, 0x44, 0x38}}, {'p', {0x7C, 0x14, 0x14, 0x14, 0x08}},
    {'q', {0x08, 0x14, 0x14, 0x18, 0x7C}}, {'r', {0x7C, 0x08, 0x04, 0x04, 0x08}},
    {'s', {0x48, 0x54, 0x54, 0x54, 0x20}}, {'t', {0x04, 0x3F, 0x44, 0x40, 0x20}},
    {'u', {0x3C, 0x40, 0x40, 0x20, 0x7C}}, {'v', {0x1C, 0x20, 0x40, 0x20, 0x1C}},
    {'w', {0x3C, 0x40, 0x30, 0x40, 0x3C}}, {'x', {0x44, 0x28, 0x10, 0x28, 0x44}},
    {'y', {0x0C, 0x50, 0x50, 0x50, 0x3C}}, {'z', {0x44, 0x64, 0x54, 0x4C, 0x44}},
};

const std::uint8_t* find_glyph(char ch) {
  for (const Glyph& g : kFont)
    if (g.ch == ch) return g.cols;
  return kFont[0].cols;  // unknown characters render as space
}

void draw_text(Image& img, int x0, int y0, const std::string& text, Rgb color) {
  for (std::size_t c = 0; c < text.size(); ++c) {
    const std::uint8_t* cols = find_glyph(text[c]);
    int gx0 = x0 + static_cast<int>(c) * 6;
    for (int cx = 0; cx < 5; ++cx)
      for (int cy = 0; cy < 7; ++cy) {
        if (!((cols[cx] >> cy) & 1)) continue;
        int x = gx0 + cx, y = y0 + cy;
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
        img.at(x, y, 0) = color.r;
        img.at(x, y, 1) = color.g;
        img.at(x, y, 2) = color.b;
      }
  }
}

}  // namespace

std::array<Rgb, kNumCategories> material_palette() {
  std::array<Rgb, kNumCategories> palette;
  for (int i = 0; i < kNumCategories; ++i)
    palette[i] = hsv_to_rgb(static_cast<double>(i) / kNumCategories, 0.65, 0.95);
  palette[kOtherCategory] = {128, 128, 128};
  return palette;
}

Image render_labelmap(const LabelMap& map) {
  const auto palette = material_palette();
  Image img(map.width, map.height, 3, ColorSpace::SrgbU8);
  for (int y = 0; y < map.height; ++y)
    for (int x = 0; x < map.width; ++x) {
      std::uint8_t l = map.labels[static_cast<std::size_t>(y) * map.width + x];
      const Rgb& c = l < kNumCategories ? palette[l] : Rgb{0, 0, 0};
      img.at(x, y, 0) = c.r;
      img.at(x, y, 1) = c.g;
      img.at(x, y, 2) = c.b;
    }
  return img;
}

Image render_legend() {
  const auto palette = material_palette();
  const int row_h = 14, swatch_w = 36, text_w = 6 * 15 + 8;
  Image img(swatch_w + text_w, row_h * kNumCategories, 3, ColorSpace::SrgbU8, 255.0f);
  for (int i = 0; i < kNumCategories; ++i) {
    for (int y = i * row_h; y < (i + 1) * row_h; ++y)
      for (int x = 0; x < swatch_w; ++x) {
        img.at(x, y, 0) = palette[i].r;
        img.at(x, y, 1) = palette[i].g;
        img.at(x, y, 2) = palette[i].b;
      }
    draw_text(img, swatch_w + 4, i * row_h + 3, category_names()[i], Rgb{0, 0, 0});
  }
  return img;
}

}  // namespace mincseg
