#pragma once

#include <array>
#include <vector>

#include "mincseg/image.hpp"
#include "mincseg/net.hpp"
#include "mincseg/probmap.hpp"

namespace mincseg {

// Scale plan for a network trained at patch scale s: the input is resized so
// a patch maps to a 256x256 square (smaller dimension d = 256/s), evaluated
// at the three smaller-dimensions {d/sqrt(2), d, d*sqrt(2)}, and fused on a
// canvas with smaller dimension 550.
struct ScalePlan {
  double patch_scale = 0.233;
  int base_dim = 0;
  std::array<int, 3> scales{};
  int fusion_dim = 550;
};

ScalePlan plan_scales(double patch_scale);

// Averages per-scale maps onto a target_w x target_h canvas and renormalizes
// each cell. All maps are sampled in their own source-pixel coordinates;
// src_dims gives each map's source raster size.
ProbabilityMap fuse_maps(const std::vector<ProbabilityMap>& maps,
                         const std::vector<std::pair<int, int>>& src_dims,
                         int target_w, int target_h);

// Full multi-scale dense prediction: resize to each planned scale, run the
// sliding network, upsample every map to the fusion canvas, average.
// num_scales is 3 (default) or 1 (base scale only).
ProbabilityMap predict_multiscale(const NetworkSpec& net, const WeightStore& weights,
                                  const Image& image, const ScalePlan& plan,
                                  bool half_stride, int num_scales = 3);

}  // namespace mincseg
