#include "mincseg/annotations.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mincseg {

using nlohmann::json;

const std::array<std::string, kNumCategories>& category_names() {
  static const std::array<std::string, kNumCategories> names = {
      "brick",    "carpet",  "ceramic", "fabric",         "foliage", "food",
      "glass",    "hair",    "leather", "metal",          "mirror",  "other",
      "painted",  "paper",   "plastic", "polished stone", "skin",    "sky",
      "stone",    "tile",    "wallpaper", "water",        "wood"};
  return names;
}

int category_from_name(const std::string& name) {
  const auto& names = category_names();
  for (int i = 0; i < kNumCategories; ++i)
    if (names[i] == name) return i;
  return -1;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validate: return "validate";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "validate") return Split::Validate;
  if (name == "test") return Split::Test;
  throw std::runtime_error("unknown split '" + name + "'");
}

bool point_in_polygon(double x, double y, const std::vector<Point>& vertices) {
  bool inside = false;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = vertices[i];
    const Point& b = vertices[j];
    if ((a.y > y) != (b.y > y)) {
      double xint = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (x < xint) inside = !inside;
    }
  }
  return inside;
}

namespace {

int parse_category(const json& j, int line) {
  int c = category_from_name(j.at("category").get<std::string>());
  if (c < 0)
    throw std::runtime_error("line " + std::to_string(line) + ": unknown category '" +
                             j.at("category").get<std::string>() + "'");
  return c;
}

}  // namespace

AnnotationSet read_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  AnnotationSet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "photo") {
        PhotoInfo p;
        p.photo_id = j.at("photo_id").get<std::string>();
        p.width = j.at("width").get<int>();
        p.height = j.at("height").get<int>();
        p.cluster_id = j.value("cluster_id", std::int64_t{0});
        set.photos.push_back(std::move(p));
      } else if (kind == "segment") {
        SegmentPolygon s;
        s.photo_id = j.at("photo_id").get<std::string>();
        s.category = parse_category(j, lineno);
        for (const json& v : j.at("vertices"))
          s.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        if (s.vertices.size() < 3)
          throw std::runtime_error("segment needs at least 3 vertices");
        set.segments.push_back(std::move(s));
      } else if (kind == "click") {
        ClickLabel c;
        c.photo_id = j.at("photo_id").get<std::string>();
        c.category = parse_category(j, lineno);
        c.point = {j.at("point").at(0).get<double>(), j.at("point").at(1).get<double>()};
        set.clicks.push_back(std::move(c));
      } else if (kind == "patch") {
        PatchRecord r;
        r.photo_id = j.at("photo_id").get<std::string>();
        r.category = parse_category(j, lineno);
        r.geometry.center_x = j.at("center").at(0).get<double>();
        r.geometry.center_y = j.at("center").at(1).get<double>();
        r.geometry.scale = j.at("scale").get<double>();
        r.source = j.at("source").get<std::string>() == "segment" ? PatchSource::Segment
                                                                  : PatchSource::Click;
        r.split = split_from_name(j.value("split", "train"));
        set.patches.push_back(std::move(r));
      } else {
        throw std::runtime_error("unknown kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const std::runtime_error& e) {
      std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + msg);
    }
  }
  return set;
}

std::string patch_record_to_json(const PatchRecord& rec) {
  json j;
  j["version"] = 1;
  j["kind"] = "patch";
  j["photo_id"] = rec.photo_id;
  j["category"] = category_names()[rec.category];
  j["center"] = {rec.geometry.center_x, rec.geometry.center_y};
  j["scale"] = rec.geometry.scale;
  j["source"] = rec.source == PatchSource::Segment ? "segment" : "click";
  j["split"] = split_name(rec.split);
  return j.dump();
}

void write_annotations(const std::string& path, const AnnotationSet& set) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const PhotoInfo& p : set.photos) {
    json j;
    j["version"] = 1;
    j["kind"] = "photo";
    j["photo_id"] = p.photo_id;
    j["width"] = p.width;
    j["height"] = p.height;
    j["cluster_id"] = p.cluster_id;
    out << j.dump() << "\n";
  }
  for (const SegmentPolygon& s : set.segments) {
    json j;
    j["version"] = 1;
    j["kind"] = "segment";
    j["photo_id"] = s.photo_id;
    j["category"] = category_names()[s.category];
    j["vertices"] = json::array();
    for (const Point& v : s.vertices) j["vertices"].push_back({v.x, v.y});
    out << j.dump() << "\n";
  }
  for (const ClickLabel& c : set.clicks) {
    json j;
    j["version"] = 1;
    j["kind"] = "click";
    j["photo_id"] = c.photo_id;
    j["category"] = category_names()[c.category];
    j["point"] = {c.point.x, c.point.y};
    out << j.dump() << "\n";
  }
  for (const PatchRecord& r : set.patches) out << patch_record_to_json(r) << "\n";
  if (!out) throw std::runtime_error("short write to " + path);
}

}  // namespace mincseg
