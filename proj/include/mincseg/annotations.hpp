#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mincseg/image.hpp"

namespace mincseg {

// The 23 material categories, id order fixed.
constexpr int kNumCategories = 23;
const std::array<std::string, kNumCategories>& category_names();
int category_from_name(const std::string& name);  // -1 when unknown

enum class Split { Train, Validate, Test };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct Point {
  double x = 0.0, y = 0.0;
};

// Simple (non-self-intersecting) polygon enclosing one material region.
struct SegmentPolygon {
  std::string photo_id;
  int category = 0;
  std::vector<Point> vertices;
};

// A single labeled point.
struct ClickLabel {
  std::string photo_id;
  int category = 0;
  Point point;
};

enum class PatchSource { Segment, Click };

struct PatchRecord {
  std::string photo_id;
  PatchGeometry geometry;
  int category = 0;
  PatchSource source = PatchSource::Click;
  Split split = Split::Train;
};

struct PhotoInfo {
  std::string photo_id;
  int width = 0, height = 0;
  std::int64_t cluster_id = 0;
};

// Even-odd rule on pixel-space coordinates.
bool point_in_polygon(double x, double y, const std::vector<Point>& vertices);

// Line-delimited JSON corpus: one annotation per line, discriminated by the
// "kind" field (photo / segment / click / patch). Schema violations are
// reported with their line number.
struct AnnotationSet {
  std::vector<PhotoInfo> photos;
  std::vector<SegmentPolygon> segments;
  std::vector<ClickLabel> clicks;
  std::vector<PatchRecord> patches;
};

AnnotationSet read_annotations(const std::string& path);
void write_annotations(const std::string& path, const AnnotationSet& set);
std::string patch_record_to_json(const PatchRecord& rec);

}  // namespace mincseg
