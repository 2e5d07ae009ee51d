#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mincseg/probmap.hpp"
#include "mincseg/tensor.hpp"

namespace mincseg {

enum class LayerKind { Conv, MaxPool, Relu, FullyConnected, Softmax };

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  int out_channels = 0;  // Conv / FullyConnected only
};

enum class NetMode { Patch, Sliding };

// Declarative layer list. Patch mode classifies one input_size x input_size
// crop and must end in Softmax over num_labels; Sliding mode is the
// convolutionalized form that accepts any spatial extent.
struct NetworkSpec {
  std::vector<LayerSpec> layers;
  int input_size = 0;
  int input_channels = 3;
  int num_labels = 23;
  NetMode mode = NetMode::Patch;
};

struct LayerWeights {
  std::vector<float> weights;
  std::vector<float> bias;
};

// Per-layer weight and bias blobs keyed by layer index. Conv weights are
// [out][in][kh][kw]; FullyConnected weights are [out][in*h*w] against the
// (channel, row, col) row-major flattening of the incoming tensor.
struct WeightStore {
  std::map<int, LayerWeights> by_layer;
};

// Total stride, receptive field and the left coordinate offset introduced by
// internal padding, accumulated over the stack.
struct NetGeometry {
  int total_stride = 1;
  int receptive_field = 1;
  int pad_offset = 0;  // window start of output cell i is i*stride - pad_offset
};

NetGeometry network_geometry(const NetworkSpec& net);

// Runs a Patch-mode network on one crop; returns the softmax distribution
// over num_labels (sums to 1 within 1e-5).
std::vector<float> forward_patch(const NetworkSpec& net, const WeightStore& weights,
                                 const Tensor& input);

// Rewrites FullyConnected layers as convolutions: the first one gets a kernel
// equal to its incoming spatial extent, later ones become 1x1. Weight blobs
// are reinterpreted, never modified, so the converted net reproduces
// forward_patch exactly on an input_size crop.
std::pair<NetworkSpec, WeightStore> convolutionalize(const NetworkSpec& net,
                                                     const WeightStore& weights);

// Dense grid of softmax vectors at spacing total_stride (total_stride/2 with
// half_stride, realized by re-running on inputs shifted by half the stride in
// x, y, and both; unshifted cells land on the even grid positions bit for
// bit). The image is edge-replicated by ceil(receptive_field/2) per side so
// grid centers line up with input pixel coordinates; the map's origin and
// spacing record the alignment.
//
// For padding-free stacks every grid cell equals forward_patch on the
// matching receptive-field crop of the padded image; layers with internal
// padding see zero-padded feature maps at image borders instead, as usual
// for convolutional evaluation.
ProbabilityMap forward_dense(const NetworkSpec& net, const WeightStore& weights,
                             const Tensor& image, bool half_stride);

// Edge-replication padding on the spatial dims.
Tensor replicate_pad(const Tensor& t, int pad);

// Seeded Gaussian(0, 0.05) weights sized for the network; the stand-in for
// trained weights (none ship with the repo).
WeightStore random_weights(const NetworkSpec& net, std::uint64_t seed);

// Versioned JSON for NetworkSpec; little-endian float32 blob with an
// (layer id, kind, offset, length) index for WeightStore.
void save_network_spec(const std::string& path, const NetworkSpec& net);
NetworkSpec load_network_spec(const std::string& path);
void save_weights(const std::string& path, const WeightStore& weights);
WeightStore load_weights(const std::string& path);

}  // namespace mincseg
