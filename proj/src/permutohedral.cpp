#include "mincseg/permutohedral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

namespace mincseg {

namespace {

// Open-addressing hash map from (d int32 coords) to a dense vertex index.
// Grows by rehashing; iteration order of vertices is insertion order, which
// keeps the filter deterministic.
class VertexTable {
 public:
  VertexTable(int dim, std::size_t expected) : d_(dim) {
    capacity_ = 64;
    while (capacity_ < expected * 2) capacity_ <<= 1;
    slots_.assign(capacity_, -1);
    slot_keys_.resize(capacity_ * d_);
  }

  // Returns the vertex index for a key, inserting if new (insert == true),
  // or -1 when absent (insert == false).
  int lookup(const int* key, bool insert) {
    std::size_t h = hash(key) & (capacity_ - 1);
    for (;;) {
      int idx = slots_[h];
      if (idx == -1) {
        if (!insert) return -1;
        int vertex = static_cast<int>(keys_.size() / d_);
        keys_.insert(keys_.end(), key, key + d_);
        slots_[h] = vertex;
        std::memcpy(&slot_keys_[h * d_], key, d_ * sizeof(int));
        if (keys_.size() / d_ > capacity_ * 2 / 3) grow();
        return vertex;
      }
      if (std::memcmp(&slot_keys_[h * d_], key, d_ * sizeof(int)) == 0) return idx;
      h = (h + 1) & (capacity_ - 1);
    }
  }

  int size() const { return static_cast<int>(keys_.size() / d_); }
  const int* key(int vertex) const { return &keys_[static_cast<std::size_t>(vertex) * d_]; }

 private:
  std::size_t hash(const int* key) const {
    std::uint64_t h = 14695981039346656037ull;
    for (int i = 0; i < d_; ++i) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(key[i]));
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }

  void grow() {
    std::size_t old_cap = capacity_;
    capacity_ <<= 1;
    std::vector<int> old_slots = std::move(slots_);
    std::vector<int> old_keys = std::move(slot_keys_);
    slots_.assign(capacity_, -1);
    slot_keys_.assign(capacity_ * d_, 0);
    for (std::size_t s = 0; s < old_cap; ++s) {
      if (old_slots[s] == -1) continue;
      std::size_t h = hash(&old_keys[s * d_]) & (capacity_ - 1);
      while (slots_[h] != -1) h = (h + 1) & (capacity_ - 1);
      slots_[h] = old_slots[s];
      std::memcpy(&slot_keys_[h * d_], &old_keys[s * d_], d_ * sizeof(int));
    }
  }

  int d_;
  std::size_t capacity_;
  std::vector<int> slots_;      // vertex index per slot, -1 empty
  std::vector<int> slot_keys_;  // key per slot
  std::vector<int> keys_;       // dense key storage in insertion order
};

}  // namespace

PermutohedralLattice::PermutohedralLattice(const double* features, int num_points, int dim)
    : n_(num_points), d_(dim) {
  if (num_points < 1 || dim < 1)
    throw std::invalid_argument("PermutohedralLattice: need at least one point and dim >= 1");

  const int dp1 = d_ + 1;
  amplitude_ = std::pow(4.0 * M_PI / 3.0, d_ / 2.0) * std::sqrt(static_cast<double>(dp1));

  // Variance-matching embedding scale: unit feature distance maps to
  // sqrt(2/3)*(d+1) in the hyperplane, split across the triangular basis.
  std::vector<double> scale(d_);
  const double inv_std_dev = std::sqrt(2.0 / 3.0) * dp1;
  for (int i = 0; i < d_; ++i)
    scale[i] = inv_std_dev / std::sqrt(static_cast<double>((i + 1) * (i + 2)));

  offsets_.assign(static_cast<std::size_t>(n_) * dp1, 0);
  barycentric_.assign(static_cast<std::size_t>(n_) * dp1, 0.0f);

  VertexTable table(d_, static_cast<std::size_t>(n_) * 2);

  std::vector<double> elevated(dp1), bary(dp1 + 1);
  std::vector<int> rem0(dp1), rank(dp1), key(d_);

  for (int p = 0; p < n_; ++p) {
    const double* f = features + static_cast<std::size_t>(p) * d_;

    // Embed into the hyperplane sum(x) = 0.
    double sm = 0.0;
    for (int j = d_; j > 0; --j) {
      double cf = f[j - 1] * scale[j - 1];
      elevated[j] = sm - j * cf;
      sm += cf;
    }
    elevated[0] = sm;

    // Closest remainder-0 lattice point.
    int sum = 0;
    for (int i = 0; i <= d_; ++i) {
      double v = elevated[i] / dp1;
      int up = static_cast<int>(std::ceil(v)) * dp1;
      int down = static_cast<int>(std::floor(v)) * dp1;
      rem0[i] = (up - elevated[i] < elevated[i] - down) ? up : down;
      sum += rem0[i] / dp1;
    }

    // Rank coordinates by their differential, then repair the remainder so
    // the point sits in a valid canonical simplex.
    std::fill(rank.begin(), rank.end(), 0);
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j <= d_; ++j) {
        if (elevated[i] - rem0[i] < elevated[j] - rem0[j])
          ++rank[i];
        else
          ++rank[j];
      }
    for (int i = 0; i <= d_; ++i) {
      rank[i] += sum;
      if (rank[i] < 0) {
        rank[i] += dp1;
        rem0[i] += dp1;
      } else if (rank[i] > d_) {
        rank[i] -= dp1;
        rem0[i] -= dp1;
      }
    }

    // Barycentric coordinates from the sorted differentials.
    std::fill(bary.begin(), bary.end(), 0.0);
    for (int i = 0; i <= d_; ++i) {
      double delta = (elevated[i] - rem0[i]) / dp1;
      bary[d_ - rank[i]] += delta;
      bary[dp1 - rank[i]] -= delta;
    }
    bary[0] += 1.0 + bary[dp1];

    // Splat targets: the d+1 vertices of the enclosing simplex.
    for (int r = 0; r <= d_; ++r) {
      for (int i = 0; i < d_; ++i)
        key[i] = rem0[i] + (rank[i] < dp1 - r ? r : r - dp1);
      offsets_[static_cast<std::size_t>(p) * dp1 + r] = table.lookup(key.data(), true);
      barycentric_[static_cast<std::size_t>(p) * dp1 + r] = static_cast<float>(bary[r]);
    }
  }

  num_vertices_ = table.size();

  // Resolve blur neighbors once; the per-iteration blur is then pure array
  // arithmetic. Neighbors along direction j differ by +-((d+1)e_j - 1).
  blur_n1_.assign(static_cast<std::size_t>(dp1) * num_vertices_, -1);
  blur_n2_.assign(static_cast<std::size_t>(dp1) * num_vertices_, -1);
  std::vector<int> n1(d_), n2(d_);
  for (int v = 0; v < num_vertices_; ++v) {
    const int* k = table.key(v);
    for (int j = 0; j <= d_; ++j) {
      for (int i = 0; i < d_; ++i) {
        n1[i] = k[i] - 1 + (i == j ? dp1 : 0);
        n2[i] = k[i] + 1 - (i == j ? dp1 : 0);
      }
      blur_n1_[static_cast<std::size_t>(j) * num_vertices_ + v] = table.lookup(n1.data(), false);
      blur_n2_[static_cast<std::size_t>(j) * num_vertices_ + v] = table.lookup(n2.data(), false);
    }
  }
}

void PermutohedralLattice::filter(const double* in, double* out, int channels) const {
  const int dp1 = d_ + 1;
  const int block = std::min(channels, 8);
  std::vector<float> values(static_cast<std::size_t>(num_vertices_) * block);
  std::vector<float> scratch(static_cast<std::size_t>(num_vertices_) * block);

  for (int c0 = 0; c0 < channels; c0 += block) {
    const int bc = std::min(block, channels - c0);
    std::fill(values.begin(), values.end(), 0.0f);

    // Splat.
    for (int p = 0; p < n_; ++p) {
      const double* src = in + static_cast<std::size_t>(p) * channels + c0;
      for (int r = 0; r <= d_; ++r) {
        const float w = barycentric_[static_cast<std::size_t>(p) * dp1 + r];
        float* dst =
            values.data() +
            static_cast<std::size_t>(offsets_[static_cast<std::size_t>(p) * dp1 + r]) * bc;
        for (int b = 0; b < bc; ++b) dst[b] += w * static_cast<float>(src[b]);
      }
    }

    // Blur with [1,2,1]/4 along each lattice direction.
    float* cur = values.data();
    float* nxt = scratch.data();
    for (int j = 0; j <= d_; ++j) {
      const int* n1 = blur_n1_.data() + static_cast<std::size_t>(j) * num_vertices_;
      const int* n2 = blur_n2_.data() + static_cast<std::size_t>(j) * num_vertices_;
      for (int v = 0; v < num_vertices_; ++v) {
        const float* self = cur + static_cast<std::size_t>(v) * bc;
        const float* a = n1[v] >= 0 ? cur + static_cast<std::size_t>(n1[v]) * bc : nullptr;
        const float* b = n2[v] >= 0 ? cur + static_cast<std::size_t>(n2[v]) * bc : nullptr;
        float* dst = nxt + static_cast<std::size_t>(v) * bc;
        for (int k = 0; k < bc; ++k) {
          float nb = (a ? a[k] : 0.0f) + (b ? b[k] : 0.0f);
          dst[k] = 0.5f * self[k] + 0.25f * nb;
        }
      }
      std::swap(cur, nxt);
    }

    // Slice.
    for (int p = 0; p < n_; ++p) {
      double* dst = out + static_cast<std::size_t>(p) * channels + c0;
      for (int b = 0; b < bc; ++b) dst[b] = 0.0;
      for (int r = 0; r <= d_; ++r) {
        const float w = barycentric_[static_cast<std::size_t>(p) * dp1 + r];
        const float* src =
            cur + static_cast<std::size_t>(offsets_[static_cast<std::size_t>(p) * dp1 + r]) * bc;
        for (int b = 0; b < bc; ++b) dst[b] += w * src[b];
      }
      for (int b = 0; b < bc; ++b) dst[b] *= amplitude_;
    }
  }
}

}  // namespace mincseg
