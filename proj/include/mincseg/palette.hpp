#pragma once

#include <array>
#include <cstdint>

#include "mincseg/crf.hpp"
#include "mincseg/image.hpp"

namespace mincseg {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

// Deterministic hue-stepped palette, one color per category; 'other' is
// mid-gray.
std::array<Rgb, kNumCategories> material_palette();

// Label indices to palette colors.
Image render_labelmap(const LabelMap& map);

// 23-row swatch image with category names.
Image render_legend();

}  // namespace mincseg
