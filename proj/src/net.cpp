#include "mincseg/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "mincseg/common.hpp"

namespace mincseg {

namespace {

using nlohmann::json;

int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

void check_layer(const LayerSpec& l) {
  if (l.kernel < 1 || l.stride < 1 || l.pad < 0)
    throw std::invalid_argument("layer: kernel/stride must be >= 1 and pad >= 0");
}

const LayerWeights& layer_weights(const WeightStore& ws, int layer_index) {
  auto it = ws.by_layer.find(layer_index);
  if (it == ws.by_layer.end())
    throw std::logic_error("missing weights for layer " + std::to_string(layer_index));
  return it->second;
}

Tensor conv_forward(const Tensor& in, const LayerSpec& l, const LayerWeights& lw) {
  const int oh = conv_out_dim(in.h, l.kernel, l.stride, l.pad);
  const int ow = conv_out_dim(in.w, l.kernel, l.stride, l.pad);
  if (oh < 1 || ow < 1) throw std::invalid_argument("conv: input smaller than kernel");
  const std::size_t want =
      static_cast<std::size_t>(l.out_channels) * in.c * l.kernel * l.kernel;
  if (lw.weights.size() != want || lw.bias.size() != static_cast<std::size_t>(l.out_channels))
    throw std::logic_error("conv: weight blob size does not match layer spec");

  Tensor out(in.n, l.out_channels, oh, ow);
  const int k = l.kernel;
  for (int b = 0; b < in.n; ++b)
    for (int o = 0; o < l.out_channels; ++o) {
      const float* wbase = lw.weights.data() + static_cast<std::size_t>(o) * in.c * k * k;
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          float acc = lw.bias[o];
          const int iy0 = oy * l.stride - l.pad;
          const int ix0 = ox * l.stride - l.pad;
          for (int c = 0; c < in.c; ++c) {
            const float* wc = wbase + static_cast<std::size_t>(c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
              const int iy = iy0 + ky;
              if (iy < 0 || iy >= in.h) continue;
              const float* row = in.data.data() + in.index(b, c, iy, 0);
              const float* wrow = wc + static_cast<std::size_t>(ky) * k;
              for (int kx = 0; kx < k; ++kx) {
                const int ix = ix0 + kx;
                if (ix < 0 || ix >= in.w) continue;
                acc += row[ix] * wrow[kx];
              }
            }
          }
          out.at(b, o, oy, ox) = acc;
        }
    }
  return out;
}

Tensor maxpool_forward(const Tensor& in, const LayerSpec& l) {
  const int oh = conv_out_dim(in.h, l.kernel, l.stride, l.pad);
  const int ow = conv_out_dim(in.w, l.kernel, l.stride, l.pad);
  if (oh < 1 || ow < 1) throw std::invalid_argument("maxpool: input smaller than kernel");

  Tensor out(in.n, in.c, oh, ow);
  for (int b = 0; b < in.n; ++b)
    for (int c = 0; c < in.c; ++c)
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          float best = -std::numeric_limits<float>::infinity();
          for (int ky = 0; ky < l.kernel; ++ky) {
            const int iy = oy * l.stride - l.pad + ky;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < l.kernel; ++kx) {
              const int ix = ox * l.stride - l.pad + kx;
              if (ix < 0 || ix >= in.w) continue;
              best = std::max(best, in.at(b, c, iy, ix));
            }
          }
          out.at(b, c, oy, ox) = best;
        }
  return out;
}

Tensor relu_forward(Tensor in) {
  for (float& v : in.data) v = v > 0.0f ? v : 0.0f;
  return in;
}

Tensor fc_forward(const Tensor& in, const LayerSpec& l, const LayerWeights& lw) {
  const std::size_t fan_in = static_cast<std::size_t>(in.c) * in.h * in.w;
  const std::size_t want = static_cast<std::size_t>(l.out_channels) * fan_in;
  if (lw.weights.size() != want || lw.bias.size() != static_cast<std::size_t>(l.out_channels))
    throw std::logic_error("fc: weight blob size does not match incoming extent");

  Tensor out(in.n, l.out_channels, 1, 1);
  for (int b = 0; b < in.n; ++b) {
    const float* src = in.data.data() + static_cast<std::size_t>(b) * fan_in;
    for (int o = 0; o < l.out_channels; ++o) {
      const float* w = lw.weights.data() + static_cast<std::size_t>(o) * fan_in;
      float acc = lw.bias[o];
      for (std::size_t i = 0; i < fan_in; ++i) acc += src[i] * w[i];
      out.at(b, o, 0, 0) = acc;
    }
  }
  return out;
}

Tensor softmax_forward(const Tensor& in) {
  Tensor out(in.n, in.c, in.h, in.w);
  for (int b = 0; b < in.n; ++b)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        float mx = -std::numeric_limits<float>::infinity();
        for (int c = 0; c < in.c; ++c) mx = std::max(mx, in.at(b, c, y, x));
        float sum = 0.0f;
        for (int c = 0; c < in.c; ++c) {
          float e = std::exp(in.at(b, c, y, x) - mx);
          out.at(b, c, y, x) = e;
          sum += e;
        }
        for (int c = 0; c < in.c; ++c) out.at(b, c, y, x) /= sum;
      }
  return out;
}

// Spatial extent right before each layer, starting from input_size.
std::vector<int> spatial_trace(const NetworkSpec& net) {
  std::vector<int> sizes;
  int s = net.input_size;
  for (const LayerSpec& l : net.layers) {
    sizes.push_back(s);
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::MaxPool:
        s = conv_out_dim(s, l.kernel, l.stride, l.pad);
        if (s < 1) throw std::logic_error("network shrinks below 1x1 before the output");
        break;
      case LayerKind::FullyConnected:
        s = 1;
        break;
      case LayerKind::Relu:
      case LayerKind::Softmax:
        break;
    }
  }
  return sizes;
}

Tensor run_layers(const NetworkSpec& net, const WeightStore& weights, Tensor t) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    check_layer(l);
    switch (l.kind) {
      case LayerKind::Conv:
        t = conv_forward(t, l, layer_weights(weights, static_cast<int>(i)));
        break;
      case LayerKind::MaxPool:
        t = maxpool_forward(t, l);
        break;
      case LayerKind::Relu:
        t = relu_forward(std::move(t));
        break;
      case LayerKind::FullyConnected:
        t = fc_forward(t, l, layer_weights(weights, static_cast<int>(i)));
        break;
      case LayerKind::Softmax:
        t = softmax_forward(t);
        break;
    }
  }
  return t;
}

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Relu: return "relu";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::Softmax: return "softmax";
  }
  return "?";
}

LayerKind kind_from_name(const std::string& s) {
  if (s == "conv") return LayerKind::Conv;
  if (s == "maxpool") return LayerKind::MaxPool;
  if (s == "relu") return LayerKind::Relu;
  if (s == "fc") return LayerKind::FullyConnected;
  if (s == "softmax") return LayerKind::Softmax;
  throw std::runtime_error("unknown layer kind '" + s + "'");
}

}  // namespace

NetGeometry network_geometry(const NetworkSpec& net) {
  NetGeometry g;
  std::vector<int> sizes = spatial_trace(net);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    int kernel;
    switch (l.kind) {
      case LayerKind::Conv:
      case LayerKind::MaxPool:
        kernel = l.kernel;
        break;
      case LayerKind::FullyConnected:
        kernel = sizes[i];  // consumes the whole incoming extent
        break;
      default:
        continue;
    }
    int stride = l.kind == LayerKind::FullyConnected ? 1 : l.stride;
    int pad = l.kind == LayerKind::FullyConnected ? 0 : l.pad;
    g.receptive_field += (kernel - 1) * g.total_stride;
    g.pad_offset += pad * g.total_stride;
    g.total_stride *= stride;
  }
  return g;
}

std::vector<float> forward_patch(const NetworkSpec& net, const WeightStore& weights,
                                 const Tensor& input) {
  if (net.mode != NetMode::Patch) throw std::invalid_argument("forward_patch: net not in patch mode");
  if (input.h != net.input_size || input.w != net.input_size)
    throw std::invalid_argument("forward_patch: input spatial size must equal net.input_size");
  if (input.c != net.input_channels)
    throw std::invalid_argument("forward_patch: input channel count mismatch");
  if (net.layers.empty() || net.layers.back().kind != LayerKind::Softmax)
    throw std::invalid_argument("forward_patch: patch net must end in softmax");

  Tensor out = run_layers(net, weights, input);
  if (out.c != net.num_labels || out.h != 1 || out.w != 1)
    throw std::logic_error("forward_patch: network did not reduce to 1x1xnum_labels");
  return std::vector<float>(out.data.begin(), out.data.begin() + net.num_labels);
}

std::pair<NetworkSpec, WeightStore> convolutionalize(const NetworkSpec& net,
                                                     const WeightStore& weights) {
  if (net.mode != NetMode::Patch)
    throw std::invalid_argument("convolutionalize: net already in sliding mode");

  std::vector<int> sizes = spatial_trace(net);
  NetworkSpec out = net;
  out.mode = NetMode::Sliding;
  WeightStore wout = weights;

  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    LayerSpec& l = out.layers[i];
    if (l.kind != LayerKind::FullyConnected) continue;
    int extent = sizes[i];
    if (extent < 1) throw std::logic_error("convolutionalize: unknown incoming spatial size");
    l.kind = LayerKind::Conv;
    l.kernel = extent;  // first FC gets the full extent, later ones see 1x1
    l.stride = 1;
    l.pad = 0;
    // FC weights are already laid out [out][c][h][w]; reinterpretation only.
  }
  return {std::move(out), std::move(wout)};
}

Tensor replicate_pad(const Tensor& t, int pad) {
  if (pad == 0) return t;
  Tensor out(t.n, t.c, t.h + 2 * pad, t.w + 2 * pad);
  for (int b = 0; b < t.n; ++b)
    for (int c = 0; c < t.c; ++c)
      for (int y = 0; y < out.h; ++y) {
        int sy = clamp_int(y - pad, 0, t.h - 1);
        for (int x = 0; x < out.w; ++x) {
          int sx = clamp_int(x - pad, 0, t.w - 1);
          out.at(b, c, y, x) = t.at(b, c, sy, sx);
        }
      }
  return out;
}

namespace {

Tensor crop_from(const Tensor& t, int off_x, int off_y) {
  if (off_x == 0 && off_y == 0) return t;
  Tensor out(t.n, t.c, t.h - off_y, t.w - off_x);
  for (int b = 0; b < t.n; ++b)
    for (int c = 0; c < t.c; ++c)
      for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(b, c, y, x) = t.at(b, c, y + off_y, x + off_x);
  return out;
}

}  // namespace

ProbabilityMap forward_dense(const NetworkSpec& net, const WeightStore& weights,
                             const Tensor& image, bool half_stride) {
  if (net.mode != NetMode::Sliding)
    throw std::invalid_argument("forward_dense: net must be in sliding mode (convolutionalize first)");
  if (image.n != 1) throw std::invalid_argument("forward_dense: batch must be 1");
  if (image.c != net.input_channels)
    throw std::invalid_argument("forward_dense: input channel count mismatch");

  NetGeometry geom = network_geometry(net);
  const int rf = geom.receptive_field;
  const int stride = geom.total_stride;
  if (image.h < rf || image.w < rf)
    throw std::invalid_argument("forward_dense: image smaller than the receptive field (" +
                                std::to_string(rf) + ")");
  if (half_stride && stride % 2 != 0)
    throw std::invalid_argument("forward_dense: half-stride needs an even total stride");

  const int align_pad = (rf + 1) / 2;
  Tensor padded = replicate_pad(image, align_pad);

  // Window of output cell i starts at i*stride - pad_offset in padded
  // coordinates; its center, in original pixel indices, is the map origin
  // plus i*spacing.
  const double origin =
      -static_cast<double>(align_pad) - geom.pad_offset + (rf - 1) / 2.0;

  auto run = [&](int off_x, int off_y) {
    Tensor out = run_layers(net, weights, crop_from(padded, off_x, off_y));
    if (out.c != net.num_labels)
      throw std::logic_error("forward_dense: output channels != num_labels");
    return out;
  };

  if (!half_stride) {
    Tensor out = run(0, 0);
    ProbabilityMap map(out.h, out.w, net.num_labels);
    map.origin_x = origin;
    map.origin_y = origin;
    map.spacing_x = stride;
    map.spacing_y = stride;
    for (int y = 0; y < out.h; ++y)
      for (int x = 0; x < out.w; ++x)
        for (int l = 0; l < net.num_labels; ++l) map.at(y, x, l) = out.at(0, l, y, x);
    return map;
  }

  const int half = stride / 2;
  Tensor runs[2][2];  // [shift_y][shift_x]
  for (int sy = 0; sy < 2; ++sy)
    for (int sx = 0; sx < 2; ++sx) runs[sy][sx] = run(sx * half, sy * half);

  const int fine_rows = runs[0][0].h + runs[1][0].h;
  const int fine_cols = runs[0][0].w + runs[0][1].w;
  ProbabilityMap map(fine_rows, fine_cols, net.num_labels);
  map.origin_x = origin;
  map.origin_y = origin;
  map.spacing_x = half;
  map.spacing_y = half;
  for (int y = 0; y < fine_rows; ++y)
    for (int x = 0; x < fine_cols; ++x) {
      const Tensor& src = runs[y & 1][x & 1];
      for (int l = 0; l < net.num_labels; ++l)
        map.at(y, x, l) = src.at(0, l, y >> 1, x >> 1);
    }
  return map;
}

WeightStore random_weights(const NetworkSpec& net, std::uint64_t seed) {
  std::vector<int> sizes = spatial_trace(net);
  WeightStore ws;
  int channels = net.input_channels;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& l = net.layers[i];
    std::size_t nweights = 0;
    if (l.kind == LayerKind::Conv) {
      nweights = static_cast<std::size_t>(l.out_channels) * channels * l.kernel * l.kernel;
    } else if (l.kind == LayerKind::FullyConnected) {
      nweights = static_cast<std::size_t>(l.out_channels) * channels * sizes[i] * sizes[i];
    } else {
      continue;
    }
    std::mt19937_64 rng(mix_seed(seed, i));
    std::normal_distribution<float> dist(0.0f, 0.05f);
    LayerWeights lw;
    lw.weights.resize(nweights);
    for (float& v : lw.weights) v = dist(rng);
    lw.bias.assign(l.out_channels, 0.0f);
    ws.by_layer[static_cast<int>(i)] = std::move(lw);
    channels = l.out_channels;
  }
  return ws;
}

void save_network_spec(const std::string& path, const NetworkSpec& net) {
  json j;
  j["version"] = 1;
  j["input_size"] = net.input_size;
  j["input_channels"] = net.input_channels;
  j["num_labels"] = net.num_labels;
  j["mode"] = net.mode == NetMode::Patch ? "patch" : "sliding";
  j["layers"] = json::array();
  for (const LayerSpec& l : net.layers) {
    json jl;
    jl["kind"] = kind_name(l.kind);
    if (l.kind == LayerKind::Conv || l.kind == LayerKind::MaxPool) {
      jl["kernel"] = l.kernel;
      jl["stride"] = l.stride;
      jl["pad"] = l.pad;
    }
    if (l.kind == LayerKind::Conv || l.kind == LayerKind::FullyConnected)
      jl["out_channels"] = l.out_channels;
    j["layers"].push_back(jl);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

NetworkSpec load_network_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  if (j.value("version", 0) != 1) throw std::runtime_error(path + ": unsupported spec version");

  NetworkSpec net;
  net.input_size = j.at("input_size").get<int>();
  net.input_channels = j.value("input_channels", 3);
  net.num_labels = j.at("num_labels").get<int>();
  net.mode = j.at("mode").get<std::string>() == "sliding" ? NetMode::Sliding : NetMode::Patch;
  for (const json& jl : j.at("layers")) {
    LayerSpec l;
    l.kind = kind_from_name(jl.at("kind").get<std::string>());
    l.kernel = jl.value("kernel", 1);
    l.stride = jl.value("stride", 1);
    l.pad = jl.value("pad", 0);
    l.out_channels = jl.value("out_channels", 0);
    check_layer(l);
    net.layers.push_back(l);
  }
  return net;
}

namespace {

constexpr char kWeightsMagic[4] = {'M', 'C', 'W', 'B'};

struct BlobEntry {
  std::uint32_t layer;
  std::uint32_t which;  // 0 = weights, 1 = bias
  std::uint64_t offset; // in floats, from payload start
  std::uint64_t length; // in floats
};

}  // namespace

void save_weights(const std::string& path, const WeightStore& weights) {
  std::vector<BlobEntry> index;
  std::vector<float> payload;
  for (const auto& [layer, lw] : weights.by_layer) {
    index.push_back({static_cast<std::uint32_t>(layer), 0, payload.size(), lw.weights.size()});
    payload.insert(payload.end(), lw.weights.begin(), lw.weights.end());
    index.push_back({static_cast<std::uint32_t>(layer), 1, payload.size(), lw.bias.size()});
    payload.insert(payload.end(), lw.bias.begin(), lw.bias.end());
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(kWeightsMagic, 4);
  std::uint32_t version = 1, count = static_cast<std::uint32_t>(index.size());
  out.write(reinterpret_cast<const char*>(&version), 4);
  out.write(reinterpret_cast<const char*>(&count), 4);
  for (const BlobEntry& e : index) {
    out.write(reinterpret_cast<const char*>(&e.layer), 4);
    out.write(reinterpret_cast<const char*>(&e.which), 4);
    out.write(reinterpret_cast<const char*>(&e.offset), 8);
    out.write(reinterpret_cast<const char*>(&e.length), 8);
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to " + path);
}

WeightStore load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kWeightsMagic, 4) != 0)
    throw std::runtime_error(path + ": not a weight blob");
  std::uint32_t version = 0, count = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in || version != 1) throw std::runtime_error(path + ": unsupported blob version");

  std::vector<BlobEntry> index(count);
  for (BlobEntry& e : index) {
    in.read(reinterpret_cast<char*>(&e.layer), 4);
    in.read(reinterpret_cast<char*>(&e.which), 4);
    in.read(reinterpret_cast<char*>(&e.offset), 8);
    in.read(reinterpret_cast<char*>(&e.length), 8);
  }
  if (!in) throw std::runtime_error(path + ": truncated index");

  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  std::size_t nfloats = bytes.size() / sizeof(float);

  WeightStore ws;
  for (const BlobEntry& e : index) {
    if (e.offset + e.length > nfloats) throw std::runtime_error(path + ": index out of range");
    std::vector<float> values(e.length);
    std::memcpy(values.data(), bytes.data() + e.offset * sizeof(float),
                e.length * sizeof(float));
    LayerWeights& lw = ws.by_layer[static_cast<int>(e.layer)];
    (e.which == 0 ? lw.weights : lw.bias) = std::move(values);
  }
  return ws;
}

}  // namespace mincseg
