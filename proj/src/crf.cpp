#include "mincseg/crf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <json.hpp>

#include "mincseg/image_io.hpp"
#include "mincseg/permutohedral.hpp"

namespace mincseg {

namespace {

constexpr double kProbFloor = 1e-12;

// Kernel matrix precomputation cap; beyond this the exact backend streams
// rows (still O(N^2) per iteration, documented).
constexpr int kKernelCacheMax = 2048;

double kernel(const double* a, const double* b) {
  double d2 = 0.0;
  for (int k = 0; k < PixelFeatures::kDim; ++k) {
    double d = a[k] - b[k];
    d2 += d * d;
  }
  return std::exp(-0.5 * d2);
}

void softmax_rows(const std::vector<double>& energy, int n, int labels,
                  std::vector<double>& q) {
  for (int i = 0; i < n; ++i) {
    const double* e = energy.data() + static_cast<std::size_t>(i) * labels;
    double* out = q.data() + static_cast<std::size_t>(i) * labels;
    double mx = e[0];
    for (int l = 1; l < labels; ++l) mx = std::min(mx, e[l]);  // energies: smaller is better
    double sum = 0.0;
    for (int l = 0; l < labels; ++l) {
      out[l] = std::exp(mx - e[l]);
      sum += out[l];
    }
    for (int l = 0; l < labels; ++l) out[l] /= sum;
  }
}

}  // namespace

PixelFeatures build_features(const Image& lab, const CrfParams& params) {
  if (lab.channels != 3 || lab.space != ColorSpace::LabF32)
    throw std::invalid_argument("build_features: expected a 3-channel L*a*b* image");

  PixelFeatures f;
  f.width = lab.width;
  f.height = lab.height;
  f.values.resize(static_cast<std::size_t>(f.num_pixels()) * PixelFeatures::kDim);
  const double d = std::min(lab.width, lab.height);
  const double inv_pos = 1.0 / (params.theta_p * d);
  const double inv_l = 1.0 / params.theta_L;
  const double inv_ab = 1.0 / params.theta_ab;

  std::size_t idx = 0;
  for (int y = 0; y < lab.height; ++y)
    for (int x = 0; x < lab.width; ++x) {
      f.values[idx++] = x * inv_pos;
      f.values[idx++] = y * inv_pos;
      f.values[idx++] = lab.at(x, y, 0) * inv_l;
      f.values[idx++] = lab.at(x, y, 1) * inv_ab;
      f.values[idx++] = lab.at(x, y, 2) * inv_ab;
    }
  return f;
}

UnaryPotentials unary_from_probmap(const ProbabilityMap& map, int target_w, int target_h) {
  if (map.rows < 1 || map.cols < 1 || map.labels < 1)
    throw std::invalid_argument("unary_from_probmap: degenerate map");
  ProbabilityMap dense = resample_to_pixels(map, target_w, target_h,
                                            map.cols * map.spacing_x,
                                            map.rows * map.spacing_y);
  UnaryPotentials u;
  u.width = target_w;
  u.height = target_h;
  u.labels = map.labels;
  u.psi.resize(dense.values.size());
  for (std::size_t i = 0; i < dense.values.size(); ++i)
    u.psi[i] = -std::log(std::max(static_cast<double>(dense.values[i]), kProbFloor));
  return u;
}

std::vector<double> gaussian_filter_exact(const PixelFeatures& features,
                                          const std::vector<double>& values, int channels) {
  const int n = features.num_pixels();
  if (values.size() != static_cast<std::size_t>(n) * channels)
    throw std::invalid_argument("gaussian_filter_exact: values size mismatch");
  std::vector<double> out(values.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double* oi = out.data() + static_cast<std::size_t>(i) * channels;
    for (int j = 0; j < n; ++j) {
      double k = kernel(features.at(i), features.at(j));
      const double* vj = values.data() + static_cast<std::size_t>(j) * channels;
      for (int c = 0; c < channels; ++c) oi[c] += k * vj[c];
    }
  }
  return out;
}

std::vector<double> gaussian_filter_lattice(const PixelFeatures& features,
                                            const std::vector<double>& values, int channels) {
  const int n = features.num_pixels();
  if (values.size() != static_cast<std::size_t>(n) * channels)
    throw std::invalid_argument("gaussian_filter_lattice: values size mismatch");
  PermutohedralLattice lattice(features.values.data(), n, PixelFeatures::kDim);
  std::vector<double> out(values.size(), 0.0);
  lattice.filter(values.data(), out.data(), channels);
  return out;
}

MarginalField meanfield_infer(const UnaryPotentials& unary, const PixelFeatures& features,
                              double w_p, int iterations, CrfBackend backend) {
  if (unary.width != features.width || unary.height != features.height)
    throw std::invalid_argument("meanfield_infer: unary and features disagree on size");
  if (w_p < 0.0) throw std::invalid_argument("meanfield_infer: w_p must be >= 0");
  if (iterations < 1) throw std::invalid_argument("meanfield_infer: iterations must be >= 1");

  const int n = unary.width * unary.height;
  const int labels = unary.labels;

  MarginalField field;
  field.width = unary.width;
  field.height = unary.height;
  field.labels = labels;
  field.q.resize(unary.psi.size());
  softmax_rows(unary.psi, n, labels, field.q);

  // With no pairwise weight the initialization is already the fixed point.
  if (w_p == 0.0) return field;

  std::unique_ptr<PermutohedralLattice> lattice;
  std::vector<float> kcache;
  if (backend == CrfBackend::Lattice) {
    lattice = std::make_unique<PermutohedralLattice>(features.values.data(), n,
                                                     PixelFeatures::kDim);
  } else if (n <= kKernelCacheMax) {
    kcache.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        kcache[static_cast<std::size_t>(i) * n + j] =
            static_cast<float>(kernel(features.at(i), features.at(j)));
  }

  std::vector<double> filtered(field.q.size());
  std::vector<double> energy(field.q.size());

  for (int it = 0; it < iterations; ++it) {
    if (backend == CrfBackend::Lattice) {
      lattice->filter(field.q.data(), filtered.data(), labels);
    } else if (!kcache.empty()) {
      for (int i = 0; i < n; ++i) {
        double* oi = filtered.data() + static_cast<std::size_t>(i) * labels;
        std::fill(oi, oi + labels, 0.0);
        const float* krow = kcache.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
          const double k = krow[j];
          const double* qj = field.q.data() + static_cast<std::size_t>(j) * labels;
          for (int l = 0; l < labels; ++l) oi[l] += k * qj[l];
        }
      }
    } else {
      for (int i = 0; i < n; ++i) {
        double* oi = filtered.data() + static_cast<std::size_t>(i) * labels;
        std::fill(oi, oi + labels, 0.0);
        for (int j = 0; j < n; ++j) {
          const double k = kernel(features.at(i), features.at(j));
          const double* qj = field.q.data() + static_cast<std::size_t>(j) * labels;
          for (int l = 0; l < labels; ++l) oi[l] += k * qj[l];
        }
      }
    }

    for (int i = 0; i < n; ++i) {
      const double* qi = field.q.data() + static_cast<std::size_t>(i) * labels;
      const double* fi = filtered.data() + static_cast<std::size_t>(i) * labels;
      double* ei = energy.data() + static_cast<std::size_t>(i) * labels;
      double msum = 0.0;
      for (int l = 0; l < labels; ++l) msum += fi[l] - qi[l];
      for (int l = 0; l < labels; ++l) {
        const double m = fi[l] - qi[l];  // message, self term removed
        ei[l] = unary.psi[static_cast<std::size_t>(i) * labels + l] + w_p * (msum - m);
      }
    }
    softmax_rows(energy, n, labels, field.q);
  }
  return field;
}

LabelMap map_labels(const MarginalField& q) {
  LabelMap map;
  map.width = q.width;
  map.height = q.height;
  map.labels.resize(static_cast<std::size_t>(q.width) * q.height);
  for (int i = 0; i < q.width * q.height; ++i) {
    const double* qi = q.q.data() + static_cast<std::size_t>(i) * q.labels;
    int best = 0;
    for (int l = 1; l < q.labels; ++l)
      if (qi[l] > qi[best]) best = l;
    map.labels[i] = static_cast<std::uint8_t>(best);
  }
  return map;
}

void save_labelmap(const std::string& png_path, const LabelMap& map,
                   const std::vector<std::string>& label_names) {
  write_gray_png(png_path, map.labels, map.width, map.height);
  nlohmann::json j;
  j["version"] = 1;
  j["labels"] = label_names;
  std::ofstream out(png_path + ".json");
  if (!out) throw std::runtime_error("cannot write " + png_path + ".json");
  out << j.dump(2) << "\n";
}

LabelMap load_labelmap(const std::string& png_path) {
  LabelMap map;
  map.labels = read_gray_png(png_path, &map.width, &map.height);
  return map;
}

std::vector<CrfParams> default_crf_grid(int iterations) {
  const double theta_p[] = {0.05, 0.1, 0.2};
  const double theta_l[] = {5.0, 10.0, 20.0};
  const double theta_ab[] = {3.0, 5.0, 10.0};
  const double w_p[] = {0.0, 1.0, 2.0, 4.0, 8.0};
  std::vector<CrfParams> grid;
  for (double tp : theta_p)
    for (double tl : theta_l)
      for (double tab : theta_ab)
        for (double wp : w_p) grid.push_back({tp, tl, tab, wp, iterations});
  return grid;
}

}  // namespace mincseg
