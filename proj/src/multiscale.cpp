#include "mincseg/multiscale.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mincseg/common.hpp"

namespace mincseg {

ScalePlan plan_scales(double patch_scale) {
  if (!(patch_scale > 0.0) || patch_scale > 1.0)
    throw std::invalid_argument("plan_scales: patch scale must be in (0, 1]");
  ScalePlan plan;
  plan.patch_scale = patch_scale;
  plan.base_dim = round_half_up(256.0 / patch_scale);
  plan.scales = {round_half_up(plan.base_dim / std::sqrt(2.0)), plan.base_dim,
                 round_half_up(plan.base_dim * std::sqrt(2.0))};
  plan.fusion_dim = 550;
  return plan;
}

ProbabilityMap fuse_maps(const std::vector<ProbabilityMap>& maps,
                         const std::vector<std::pair<int, int>>& src_dims,
                         int target_w, int target_h) {
  if (maps.empty()) throw std::invalid_argument("fuse_maps: no maps");
  if (maps.size() != src_dims.size())
    throw std::invalid_argument("fuse_maps: maps and src_dims length mismatch");
  const int labels = maps[0].labels;
  for (const ProbabilityMap& m : maps)
    if (m.labels != labels) throw std::invalid_argument("fuse_maps: label count mismatch");

  ProbabilityMap fused(target_h, target_w, labels);
  std::vector<double> acc(labels), cell(labels);
  for (int py = 0; py < target_h; ++py)
    for (int px = 0; px < target_w; ++px) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t k = 0; k < maps.size(); ++k) {
        double sx = (px + 0.5) * src_dims[k].first / target_w - 0.5;
        double sy = (py + 0.5) * src_dims[k].second / target_h - 0.5;
        maps[k].sample_at(sx, sy, cell.data());
        for (int l = 0; l < labels; ++l) acc[l] += cell[l];
      }
      double sum = 0.0;
      for (int l = 0; l < labels; ++l) sum += acc[l];
      if (sum <= 0.0) {
        for (int l = 0; l < labels; ++l) fused.at(py, px, l) = 1.0f / labels;
      } else {
        for (int l = 0; l < labels; ++l)
          fused.at(py, px, l) = static_cast<float>(acc[l] / sum);
      }
    }
  return fused;
}

ProbabilityMap predict_multiscale(const NetworkSpec& net, const WeightStore& weights,
                                  const Image& image, const ScalePlan& plan,
                                  bool half_stride, int num_scales) {
  if (num_scales != 1 && num_scales != 3)
    throw std::invalid_argument("predict_multiscale: num_scales must be 1 or 3");
  if (image.empty()) throw std::invalid_argument("predict_multiscale: empty image");

  const NetGeometry geom = network_geometry(net);
  std::vector<int> targets;
  if (num_scales == 1)
    targets = {plan.scales[1]};
  else
    targets = {plan.scales[0], plan.scales[1], plan.scales[2]};
  for (int t : targets)
    if (t < geom.receptive_field)
      throw std::invalid_argument("predict_multiscale: scale " + std::to_string(t) +
                                  " is below the receptive field (" +
                                  std::to_string(geom.receptive_field) + ")");

  int fus_w, fus_h;
  if (image.width <= image.height) {
    fus_w = plan.fusion_dim;
    fus_h = std::max(1, round_half_up(static_cast<double>(image.height) * plan.fusion_dim /
                                      image.width));
  } else {
    fus_h = plan.fusion_dim;
    fus_w = std::max(1, round_half_up(static_cast<double>(image.width) * plan.fusion_dim /
                                      image.height));
  }

  std::vector<ProbabilityMap> maps;
  std::vector<std::pair<int, int>> dims;
  for (int t : targets) {
    Image scaled = resize_to_smaller_dim(image, t);
    Tensor input = preprocess(scaled);
    maps.push_back(forward_dense(net, weights, input, half_stride));
    dims.emplace_back(scaled.width, scaled.height);
  }
  return fuse_maps(maps, dims, fus_w, fus_h);
}

}  // namespace mincseg
