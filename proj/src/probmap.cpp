#include "mincseg/probmap.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "mincseg/common.hpp"

namespace mincseg {

namespace {

constexpr char kMagic[4] = {'P', 'M', 'A', 'P'};
constexpr std::uint32_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void put(std::FILE* f, T v) {
  if (std::fwrite(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("probmap: short write");
}

template <typename T>
T get(std::FILE* f) {
  T v;
  if (std::fread(&v, sizeof(T), 1, f) != 1) throw std::runtime_error("probmap: truncated file");
  return v;
}

}  // namespace

void ProbabilityMap::sample_at(double x, double y, double* out) const {
  double gc = clamp((x - origin_x) / spacing_x, 0.0, cols - 1.0);
  double gr = clamp((y - origin_y) / spacing_y, 0.0, rows - 1.0);
  int c0 = static_cast<int>(gc);
  int r0 = static_cast<int>(gr);
  int c1 = std::min(c0 + 1, cols - 1);
  int r1 = std::min(r0 + 1, rows - 1);
  double wc = gc - c0;
  double wr = gr - r0;
  for (int l = 0; l < labels; ++l) {
    double top = (1.0 - wc) * at(r0, c0, l) + wc * at(r0, c1, l);
    double bot = (1.0 - wc) * at(r1, c0, l) + wc * at(r1, c1, l);
    out[l] = (1.0 - wr) * top + wr * bot;
  }
}

ProbabilityMap resample_to_pixels(const ProbabilityMap& map, int target_w, int target_h,
                                  double src_w, double src_h) {
  if (map.rows < 1 || map.cols < 1 || map.labels < 1)
    throw std::invalid_argument("resample_to_pixels: degenerate map");
  if (target_w < 1 || target_h < 1)
    throw std::invalid_argument("resample_to_pixels: zero-sized target");

  ProbabilityMap out(target_h, target_w, map.labels);
  out.origin_x = 0.0;
  out.origin_y = 0.0;
  out.spacing_x = 1.0;
  out.spacing_y = 1.0;
  std::vector<double> cell(map.labels);
  for (int py = 0; py < target_h; ++py) {
    double sy = (py + 0.5) * src_h / target_h - 0.5;
    for (int px = 0; px < target_w; ++px) {
      double sx = (px + 0.5) * src_w / target_w - 0.5;
      map.sample_at(sx, sy, cell.data());
      for (int l = 0; l < map.labels; ++l)
        out.at(py, px, l) = static_cast<float>(cell[l]);
    }
  }
  return out;
}

void save_probmap(const std::string& path, const ProbabilityMap& map) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  if (std::fwrite(kMagic, 1, 4, f.get()) != 4) throw std::runtime_error("probmap: short write");
  put<std::uint32_t>(f.get(), kVersion);
  put<std::uint32_t>(f.get(), static_cast<std::uint32_t>(map.rows));
  put<std::uint32_t>(f.get(), static_cast<std::uint32_t>(map.cols));
  put<std::uint32_t>(f.get(), static_cast<std::uint32_t>(map.labels));
  put<double>(f.get(), map.origin_x);
  put<double>(f.get(), map.origin_y);
  put<double>(f.get(), map.spacing_x);
  put<double>(f.get(), map.spacing_y);
  if (std::fwrite(map.values.data(), sizeof(float), map.values.size(), f.get()) !=
      map.values.size())
    throw std::runtime_error("probmap: short write");
}

ProbabilityMap load_probmap(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path + ": not a probability map blob");
  std::uint32_t version = get<std::uint32_t>(f.get());
  if (version != kVersion) throw std::runtime_error(path + ": unsupported version");
  int rows = static_cast<int>(get<std::uint32_t>(f.get()));
  int cols = static_cast<int>(get<std::uint32_t>(f.get()));
  int labels = static_cast<int>(get<std::uint32_t>(f.get()));
  ProbabilityMap map(rows, cols, labels);
  map.origin_x = get<double>(f.get());
  map.origin_y = get<double>(f.get());
  map.spacing_x = get<double>(f.get());
  map.spacing_y = get<double>(f.get());
  if (std::fread(map.values.data(), sizeof(float), map.values.size(), f.get()) !=
      map.values.size())
    throw std::runtime_error(path + ": truncated payload");
  return map;
}

void dump_probmap_text(const std::string& path, const ProbabilityMap& map) {
  FilePtr f(std::fopen(path.c_str(), "w"));
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(f.get(), "probmap %u %d %d %d %.17g %.17g %.17g %.17g\n", kVersion, map.rows,
               map.cols, map.labels, map.origin_x, map.origin_y, map.spacing_x, map.spacing_y);
  for (int r = 0; r < map.rows; ++r)
    for (int c = 0; c < map.cols; ++c) {
      std::fprintf(f.get(), "%d %d", r, c);
      for (int l = 0; l < map.labels; ++l) std::fprintf(f.get(), " %.9g", map.at(r, c, l));
      std::fputc('\n', f.get());
    }
}

ProbabilityMap parse_probmap_text(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "r"));
  if (!f) throw std::runtime_error("cannot open " + path);
  unsigned version;
  int rows, cols, labels;
  double ox, oy, sx, sy;
  if (std::fscanf(f.get(), "probmap %u %d %d %d %lg %lg %lg %lg", &version, &rows, &cols,
                  &labels, &ox, &oy, &sx, &sy) != 8)
    throw std::runtime_error(path + ": bad text dump header");
  ProbabilityMap map(rows, cols, labels);
  map.origin_x = ox;
  map.origin_y = oy;
  map.spacing_x = sx;
  map.spacing_y = sy;
  for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * cols; ++i) {
    int r, c;
    if (std::fscanf(f.get(), "%d %d", &r, &c) != 2)
      throw std::runtime_error(path + ": truncated text dump");
    for (int l = 0; l < labels; ++l) {
      float v;
      if (std::fscanf(f.get(), "%g", &v) != 1)
        throw std::runtime_error(path + ": truncated text dump");
      map.at(r, c, l) = v;
    }
  }
  return map;
}

}  // namespace mincseg
