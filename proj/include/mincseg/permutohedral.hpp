#pragma once

#include <vector>

namespace mincseg {

// Approximate high-dimensional Gaussian filtering by splat-blur-slice on the
// permutohedral lattice. Given per-point feature vectors f_i, filter()
// computes out_i ~= sum_j exp(-||f_i - f_j||^2 / 2) * v_j (self term
// included). The lattice structure depends only on the features, so one
// instance filters any number of value channels; build once, filter per
// mean-field iteration.
//
// The splatted kernel reproduces the unit Gaussian's mass exactly in the
// continuum limit, which fixes the output scale analytically: the slice is
// multiplied by (4*pi/3)^(d/2) * sqrt(d+1), the ratio of the Gaussian's
// integral to the lattice cell volume under the variance-matching embedding.
class PermutohedralLattice {
 public:
  PermutohedralLattice(const double* features, int num_points, int dim);

  // in/out are point-major [num_points][channels]; out may not alias in.
  void filter(const double* in, double* out, int channels) const;

  int num_points() const { return n_; }
  int dim() const { return d_; }
  int num_vertices() const { return num_vertices_; }

 private:
  int n_ = 0;
  int d_ = 0;
  int num_vertices_ = 0;
  double amplitude_ = 1.0;
  std::vector<int> offsets_;        // [n][d+1] vertex index per simplex corner
  std::vector<float> barycentric_;  // [n][d+1]
  std::vector<int> blur_n1_;        // [d+1][vertices], -1 when absent
  std::vector<int> blur_n2_;
};

}  // namespace mincseg
