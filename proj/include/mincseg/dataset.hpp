#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mincseg/annotations.hpp"
#include "mincseg/image.hpp"

namespace mincseg {

// Poisson-disk subsampling of a segment interior: returned centers lie
// inside the polygon and every pair is separated by at least
// r = r_fraction * min(image_w, image_h). Bridson-style dart throwing with a
// 30-rejection budget per active point; deterministic given the seed.
std::vector<Point> poisson_disk_sample(const SegmentPolygon& polygon, int image_w,
                                       int image_h, double r_fraction, std::uint64_t seed);

struct GeneratedPatches {
  std::vector<PatchRecord> records;
  int skipped = 0;  // annotations outside their photo's bounds
};

// One patch per click, Poisson-disk centers per segment; category inherited
// from the annotation. Photos missing from `photos` or annotations outside
// image bounds are skipped and counted.
GeneratedPatches generate_patches(const std::vector<SegmentPolygon>& segments,
                                  const std::vector<ClickLabel>& clicks,
                                  const std::vector<PhotoInfo>& photos,
                                  double patch_scale, std::uint64_t seed);

struct ClusterInfo {
  std::int64_t cluster_id = 0;
  int num_photos = 1;
  std::array<int, kNumCategories> segment_counts{};
};

struct SplitRatios {
  double train = 0.70, validate = 0.15, test = 0.15;
};

struct SplitAssignment {
  std::map<std::int64_t, Split> by_cluster;
  std::vector<int> infeasible_categories;  // test minimum unreachable
};

// Cluster-atomic split assignment: clusters are shuffled and dealt to the
// split with the largest photo-count deficit, then clusters are moved into
// the test split until it holds at least min_test_segments segments of every
// category (when the corpus has that many at all; otherwise the category is
// flagged).
SplitAssignment assign_splits(const std::vector<ClusterInfo>& clusters,
                              const SplitRatios& ratios, int min_test_segments,
                              std::uint64_t seed);

// Emits records in repeating rounds over all 23 categories in id order, one
// uniformly random record of each per round.
class BalancedSampler {
 public:
  BalancedSampler(const std::vector<PatchRecord>& records, std::uint64_t seed);
  const PatchRecord& next();

 private:
  std::array<std::vector<const PatchRecord*>, kNumCategories> by_category_;
  std::mt19937_64 rng_;
  int cursor_ = 0;
};

// Training augmentation: spatial scale in [1/sqrt(2), sqrt(2)] and aspect in
// [3:4, 4:3] (both log-uniform), random 227x227 crop, horizontal flip with
// probability 1/2, amplitude shift uniform in [0.95, 1.05] clamped to
// [0, 255]. Applied in the order scale, aspect, crop, flip, amplitude.
Image augment(const Image& patch, std::uint64_t seed);

struct PhotoAnnotationCounts {
  std::string photo_id;
  std::array<int, kNumCategories> segments{};
  std::array<int, kNumCategories> clicks{};
};

// Greedy maximization of sum_c log(1 + segments_c(S) + clicks_c(S)); ties
// break toward the larger total annotation count, then the smaller photo id.
std::vector<std::string> select_eval_photos(const std::vector<PhotoAnnotationCounts>& photos,
                                            int k);

}  // namespace mincseg
