#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mincseg/image.hpp"
#include "mincseg/probmap.hpp"

namespace mincseg {

// Pairwise kernel parameters. theta_p is dimensionless (it multiplies the
// smaller image dimension), theta_L / theta_ab are in L*a*b* units, w_p
// weights the Potts pairwise term.
struct CrfParams {
  double theta_p = 0.1;
  double theta_L = 10.0;
  double theta_ab = 5.0;
  double w_p = 1.0;
  int iterations = 10;
};

// 5-D per-pixel kernel features:
// (x/(theta_p*d), y/(theta_p*d), L/theta_L, a/theta_ab, b/theta_ab),
// d = min(width, height).
struct PixelFeatures {
  static constexpr int kDim = 5;
  int width = 0, height = 0;
  std::vector<double> values;  // [pixel][5]

  int num_pixels() const { return width * height; }
  const double* at(int i) const { return values.data() + static_cast<std::size_t>(i) * kDim; }
};

// Per pixel per label psi = -log p, floored at p = 1e-12.
struct UnaryPotentials {
  int width = 0, height = 0, labels = 0;
  std::vector<double> psi;  // [pixel][label]
};

// Mean-field marginals Q; each pixel's row sums to 1.
struct MarginalField {
  int width = 0, height = 0, labels = 0;
  std::vector<double> q;  // [pixel][label]
};

struct LabelMap {
  int width = 0, height = 0;
  std::vector<std::uint8_t> labels;
};

enum class CrfBackend { Exact, Lattice };

PixelFeatures build_features(const Image& lab, const CrfParams& params);

UnaryPotentials unary_from_probmap(const ProbabilityMap& map, int target_w, int target_h);

// Reference O(N^2) Gaussian filter: out_i = sum_j exp(-||f_i-f_j||^2/2) v_j,
// summed over all j including i (callers subtract the self term).
std::vector<double> gaussian_filter_exact(const PixelFeatures& features,
                                          const std::vector<double>& values, int channels);

// Permutohedral-lattice approximation of the same sums.
std::vector<double> gaussian_filter_lattice(const PixelFeatures& features,
                                            const std::vector<double>& values, int channels);

// Synchronous mean-field for the Potts energy: Q is initialized to
// softmax(-psi) and updated for a fixed number of rounds via
//   m_i(l) = (K Q)_i(l) - Q_i(l)
//   Q_i(l) <- softmax_l( -psi_i(l) - w_p * (sum_l' m_i(l') - m_i(l)) ).
MarginalField meanfield_infer(const UnaryPotentials& unary, const PixelFeatures& features,
                              double w_p, int iterations, CrfBackend backend);

// Per-pixel argmax; ties go to the lowest label index.
LabelMap map_labels(const MarginalField& q);

// Single-channel PNG of label indices plus a JSON sidecar (path + ".json")
// naming the labels.
void save_labelmap(const std::string& png_path, const LabelMap& map,
                   const std::vector<std::string>& label_names);
LabelMap load_labelmap(const std::string& png_path);

// The fixed search grid used when no explicit grid is supplied:
// theta_p in {0.05,0.1,0.2}, theta_L in {5,10,20}, theta_ab in {3,5,10},
// w_p in {0,1,2,4,8}.
std::vector<CrfParams> default_crf_grid(int iterations = 10);

}  // namespace mincseg
