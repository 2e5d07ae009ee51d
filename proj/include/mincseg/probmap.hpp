#pragma once

#include <string>
#include <vector>

namespace mincseg {

// Per-cell label distribution on a regular grid. The grid is anchored in
// source-image pixel coordinates: cell (r,c) sits at
// (origin_x + c*spacing_x, origin_y + r*spacing_y).
struct ProbabilityMap {
  int rows = 0, cols = 0, labels = 0;
  double origin_x = 0.0, origin_y = 0.0;
  double spacing_x = 1.0, spacing_y = 1.0;
  std::vector<float> values;  // [row][col][label]

  ProbabilityMap() = default;
  ProbabilityMap(int r, int c, int l)
      : rows(r), cols(c), labels(l),
        values(static_cast<std::size_t>(r) * c * l, 0.0f) {}

  std::size_t index(int r, int c, int l) const {
    return (static_cast<std::size_t>(r) * cols + c) * labels + l;
  }
  float& at(int r, int c, int l) { return values[index(r, c, l)]; }
  float at(int r, int c, int l) const { return values[index(r, c, l)]; }

  // Bilinear sample at source-image pixel coordinates (x,y), clamped to the
  // grid. `out` must hold `labels` doubles.
  void sample_at(double x, double y, double* out) const;
};

// Resamples a map onto a target_w x target_h pixel raster whose pixel (px,py)
// covers source-image coordinates ((px+0.5)*src_w/target_w - 0.5, ...).
ProbabilityMap resample_to_pixels(const ProbabilityMap& map, int target_w, int target_h,
                                  double src_w, double src_h);

// Binary blob: "PMAP" magic, version, dims, grid anchor, float32 payload,
// all little-endian. The text dump is lossless (%.9g round-trips float32).
void save_probmap(const std::string& path, const ProbabilityMap& map);
ProbabilityMap load_probmap(const std::string& path);
void dump_probmap_text(const std::string& path, const ProbabilityMap& map);
ProbabilityMap parse_probmap_text(const std::string& path);

}  // namespace mincseg
