#include "mincseg/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mincseg/common.hpp"

namespace mincseg {

namespace {

struct BBox {
  double min_x, min_y, max_x, max_y;
};

BBox polygon_bbox(const std::vector<Point>& vertices) {
  BBox b{vertices[0].x, vertices[0].y, vertices[0].x, vertices[0].y};
  for (const Point& v : vertices) {
    b.min_x = std::min(b.min_x, v.x);
    b.min_y = std::min(b.min_y, v.y);
    b.max_x = std::max(b.max_x, v.x);
    b.max_y = std::max(b.max_y, v.y);
  }
  return b;
}

// Uniform grid over the polygon bbox with cells of side r/sqrt(2), so a cell
// holds at most one sample and conflict checks only scan a 5x5 neighborhood.
class SampleGrid {
 public:
  SampleGrid(const BBox& bbox, double r)
      : origin_x_(bbox.min_x), origin_y_(bbox.min_y), cell_(r / std::sqrt(2.0)), r2_(r * r) {
    nx_ = std::max(1, static_cast<int>((bbox.max_x - bbox.min_x) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((bbox.max_y - bbox.min_y) / cell_) + 1);
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, -1);
  }

  bool conflicts(const Point& p, const std::vector<Point>& points) const {
    int cx = cell_x(p.x), cy = cell_y(p.y);
    for (int gy = std::max(0, cy - 2); gy <= std::min(ny_ - 1, cy + 2); ++gy)
      for (int gx = std::max(0, cx - 2); gx <= std::min(nx_ - 1, cx + 2); ++gx) {
        int idx = cells_[static_cast<std::size_t>(gy) * nx_ + gx];
        if (idx < 0) continue;
        double dx = points[idx].x - p.x, dy = points[idx].y - p.y;
        if (dx * dx + dy * dy < r2_) return true;
      }
    return false;
  }

  void insert(const Point& p, int index) {
    cells_[static_cast<std::size_t>(cell_y(p.y)) * nx_ + cell_x(p.x)] = index;
  }

 private:
  int cell_x(double x) const { return clamp_int(static_cast<int>((x - origin_x_) / cell_), 0, nx_ - 1); }
  int cell_y(double y) const { return clamp_int(static_cast<int>((y - origin_y_) / cell_), 0, ny_ - 1); }

  double origin_x_, origin_y_, cell_, r2_;
  int nx_, ny_;
  std::vector<int> cells_;
};

}  // namespace

std::vector<Point> poisson_disk_sample(const SegmentPolygon& polygon, int image_w,
                                       int image_h, double r_fraction, std::uint64_t seed) {
  if (r_fraction <= 0.0) throw std::invalid_argument("poisson_disk_sample: r_fraction <= 0");
  if (polygon.vertices.size() < 3) return {};

  const double r = r_fraction * std::min(image_w, image_h);
  const BBox bbox = polygon_bbox(polygon.vertices);
  if (bbox.max_x <= bbox.min_x || bbox.max_y <= bbox.min_y) return {};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(bbox.min_x, bbox.max_x);
  std::uniform_real_distribution<double> uy(bbox.min_y, bbox.max_y);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Initial sample by rejection against the polygon.
  Point first;
  bool found = false;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    first = {ux(rng), uy(rng)};
    if (point_in_polygon(first.x, first.y, polygon.vertices)) {
      found = true;
      break;
    }
  }
  if (!found) return {};  // degenerate (near-zero area) polygon

  std::vector<Point> points{first};
  SampleGrid grid(bbox, r);
  grid.insert(first, 0);
  std::vector<int> active{0};

  constexpr int kAttempts = 30;
  while (!active.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    const std::size_t slot = pick(rng);
    const Point base = points[active[slot]];

    bool placed = false;
    for (int a = 0; a < kAttempts; ++a) {
      double radius = r * (1.0 + unit(rng));
      double angle = 2.0 * M_PI * unit(rng);
      Point cand{base.x + radius * std::cos(angle), base.y + radius * std::sin(angle)};
      if (!point_in_polygon(cand.x, cand.y, polygon.vertices)) continue;
      if (grid.conflicts(cand, points)) continue;
      points.push_back(cand);
      grid.insert(cand, static_cast<int>(points.size()) - 1);
      active.push_back(static_cast<int>(points.size()) - 1);
      placed = true;
      break;
    }
    if (!placed) {
      active[slot] = active.back();
      active.pop_back();
    }
  }
  return points;
}

GeneratedPatches generate_patches(const std::vector<SegmentPolygon>& segments,
                                  const std::vector<ClickLabel>& clicks,
                                  const std::vector<PhotoInfo>& photos,
                                  double patch_scale, std::uint64_t seed) {
  std::map<std::string, const PhotoInfo*> by_id;
  for (const PhotoInfo& p : photos) by_id[p.photo_id] = &p;

  GeneratedPatches out;
  for (const ClickLabel& click : clicks) {
    auto it = by_id.find(click.photo_id);
    if (it == by_id.end()) {
      ++out.skipped;
      continue;
    }
    const PhotoInfo& photo = *it->second;
    if (click.point.x < 0 || click.point.y < 0 || click.point.x >= photo.width ||
        click.point.y >= photo.height) {
      ++out.skipped;
      continue;
    }
    PatchRecord rec;
    rec.photo_id = click.photo_id;
    rec.category = click.category;
    rec.source = PatchSource::Click;
    // Integer click coordinates address pixel centers.
    rec.geometry = {(click.point.x + 0.5) / photo.width, (click.point.y + 0.5) / photo.height,
                    patch_scale};
    out.records.push_back(std::move(rec));
  }

  for (std::size_t s = 0; s < segments.size(); ++s) {
    const SegmentPolygon& seg = segments[s];
    auto it = by_id.find(seg.photo_id);
    if (it == by_id.end()) {
      ++out.skipped;
      continue;
    }
    const PhotoInfo& photo = *it->second;
    bool in_bounds = true;
    for (const Point& v : seg.vertices)
      if (v.x < 0 || v.y < 0 || v.x > photo.width || v.y > photo.height) in_bounds = false;
    if (!in_bounds) {
      ++out.skipped;
      continue;
    }
    std::vector<Point> centers =
        poisson_disk_sample(seg, photo.width, photo.height, 0.091, mix_seed(seed, s));
    for (const Point& c : centers) {
      PatchRecord rec;
      rec.photo_id = seg.photo_id;
      rec.category = seg.category;
      rec.source = PatchSource::Segment;
      rec.geometry = {c.x / photo.width, c.y / photo.height, patch_scale};
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

SplitAssignment assign_splits(const std::vector<ClusterInfo>& clusters,
                              const SplitRatios& ratios, int min_test_segments,
                              std::uint64_t seed) {
  const double rsum = ratios.train + ratios.validate + ratios.test;
  if (std::abs(rsum - 1.0) > 1e-9)
    throw std::invalid_argument("assign_splits: ratios must sum to 1");

  SplitAssignment out;
  if (clusters.empty()) return out;

  std::vector<std::size_t> order(clusters.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  for (const ClusterInfo& c : clusters) total += c.num_photos;
  const double quota[3] = {ratios.train * total, ratios.validate * total, ratios.test * total};
  double assigned[3] = {0.0, 0.0, 0.0};
  const Split splits[3] = {Split::Train, Split::Validate, Split::Test};

  for (std::size_t idx : order) {
    int best = 0;
    for (int s = 1; s < 3; ++s)
      if (quota[s] - assigned[s] > quota[best] - assigned[best]) best = s;
    out.by_cluster[clusters[idx].cluster_id] = splits[best];
    assigned[best] += clusters[idx].num_photos;
  }

  // Pull clusters into test until every category reaches the minimum.
  for (int cat = 0; cat < kNumCategories; ++cat) {
    auto test_count = [&]() {
      int n = 0;
      for (const ClusterInfo& c : clusters)
        if (out.by_cluster[c.cluster_id] == Split::Test) n += c.segment_counts[cat];
      return n;
    };
    int have = test_count();
    while (have < min_test_segments) {
      const ClusterInfo* pick = nullptr;
      for (const ClusterInfo& c : clusters) {
        if (out.by_cluster[c.cluster_id] == Split::Test || c.segment_counts[cat] == 0) continue;
        if (!pick || c.segment_counts[cat] > pick->segment_counts[cat] ||
            (c.segment_counts[cat] == pick->segment_counts[cat] &&
             (c.num_photos < pick->num_photos ||
              (c.num_photos == pick->num_photos && c.cluster_id < pick->cluster_id))))
          pick = &c;
      }
      if (!pick) {
        out.infeasible_categories.push_back(cat);
        break;
      }
      out.by_cluster[pick->cluster_id] = Split::Test;
      have += pick->segment_counts[cat];
    }
  }
  return out;
}

BalancedSampler::BalancedSampler(const std::vector<PatchRecord>& records, std::uint64_t seed)
    : rng_(seed) {
  for (const PatchRecord& r : records) {
    if (r.category < 0 || r.category >= kNumCategories)
      throw std::invalid_argument("BalancedSampler: record with invalid category id");
    by_category_[r.category].push_back(&r);
  }
  for (int c = 0; c < kNumCategories; ++c)
    if (by_category_[c].empty())
      throw std::invalid_argument("BalancedSampler: category '" + category_names()[c] +
                                  "' has no records");
}

const PatchRecord& BalancedSampler::next() {
  const auto& bucket = by_category_[cursor_];
  cursor_ = (cursor_ + 1) % kNumCategories;
  std::uniform_int_distribution<std::size_t> pick(0, bucket.size() - 1);
  return *bucket[pick(rng_)];
}

Image augment(const Image& patch, std::uint64_t seed) {
  if (patch.width != 256 || patch.height != 256)
    throw std::invalid_argument("augment: input must be 256x256");
  constexpr int kOut = 227;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double log_s = std::log(std::sqrt(2.0));
  const double scale = std::exp(-log_s + 2.0 * log_s * unit(rng));
  const double log_a = std::log(4.0 / 3.0);
  const double aspect = std::exp(-log_a + 2.0 * log_a * unit(rng));

  const int new_w = std::max(1, round_half_up(256.0 * scale * std::sqrt(aspect)));
  const int new_h = std::max(1, round_half_up(256.0 * scale / std::sqrt(aspect)));
  Image resized = resize_bilinear(patch, new_w, new_h);

  int x0 = 0, y0 = 0;
  if (new_w > kOut) {
    std::uniform_int_distribution<int> px(0, new_w - kOut);
    x0 = px(rng);
  }
  if (new_h > kOut) {
    std::uniform_int_distribution<int> py(0, new_h - kOut);
    y0 = py(rng);
  }

  // Crop; dimensions below 227 (small scale draws) are edge-replicated.
  Image crop(kOut, kOut, resized.channels, resized.space);
  for (int y = 0; y < kOut; ++y) {
    int sy = clamp_int(y0 + y, 0, resized.height - 1);
    for (int x = 0; x < kOut; ++x) {
      int sx = clamp_int(x0 + x, 0, resized.width - 1);
      for (int c = 0; c < resized.channels; ++c) crop.at(x, y, c) = resized.at(sx, sy, c);
    }
  }

  if (unit(rng) < 0.5) crop = mirror_horizontal(crop);

  const double amp = 0.95 + 0.10 * unit(rng);
  for (float& v : crop.data) v = static_cast<float>(clamp(v * amp, 0.0, 255.0));
  return crop;
}

std::vector<std::string> select_eval_photos(const std::vector<PhotoAnnotationCounts>& photos,
                                            int k) {
  if (k > static_cast<int>(photos.size()))
    throw std::invalid_argument("select_eval_photos: k exceeds photo count");

  std::array<long long, kNumCategories> have{};
  std::vector<bool> taken(photos.size(), false);
  std::vector<std::string> chosen;

  auto total_annotations = [](const PhotoAnnotationCounts& p) {
    long long t = 0;
    for (int c = 0; c < kNumCategories; ++c) t += p.segments[c] + p.clicks[c];
    return t;
  };

  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_gain = -1.0;
    long long best_total = -1;
    for (std::size_t i = 0; i < photos.size(); ++i) {
      if (taken[i]) continue;
      double gain = 0.0;
      for (int c = 0; c < kNumCategories; ++c) {
        long long add = photos[i].segments[c] + photos[i].clicks[c];
        if (add > 0)
          gain += std::log(1.0 + have[c] + add) - std::log(1.0 + have[c]);
      }
      long long total = total_annotations(photos[i]);
      bool better = false;
      if (gain > best_gain + 1e-12) {
        better = true;
      } else if (gain > best_gain - 1e-12) {
        if (total > best_total) better = true;
        else if (total == best_total && best >= 0 && photos[i].photo_id < photos[best].photo_id)
          better = true;
      }
      if (best < 0 || better) {
        best = static_cast<int>(i);
        best_gain = gain;
        best_total = total;
      }
    }
    taken[best] = true;
    chosen.push_back(photos[best].photo_id);
    for (int c = 0; c < kNumCategories; ++c)
      have[c] += photos[best].segments[c] + photos[best].clicks[c];
  }
  return chosen;
}

}  // namespace mincseg
