#include "mincseg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace mincseg {

namespace {

void finalize(EvalReport& report) {
  auto [mca, ta] = summarize(report.confusion);
  report.mean_class_accuracy = mca;
  report.total_accuracy = ta;
  report.per_category.assign(report.confusion.n, -1.0);
  for (int t = 0; t < report.confusion.n; ++t) {
    double row = 0.0;
    for (int p = 0; p < report.confusion.n; ++p) row += report.confusion.at(t, p);
    if (row > 0.0) report.per_category[t] = report.confusion.at(t, t) / row;
  }
}

}  // namespace

std::pair<double, double> summarize(const ConfusionMatrix& confusion) {
  double total = 0.0, trace = 0.0, class_sum = 0.0;
  int active = 0;
  for (int t = 0; t < confusion.n; ++t) {
    double row = 0.0;
    for (int p = 0; p < confusion.n; ++p) row += confusion.at(t, p);
    total += row;
    trace += confusion.at(t, t);
    if (row > 0.0) {
      class_sum += confusion.at(t, t) / row;
      ++active;
    }
  }
  if (total <= 0.0) throw std::invalid_argument("summarize: empty confusion matrix");
  return {class_sum / active, trace / total};
}

EvalReport eval_clicks(const std::map<std::string, LabeledPhoto>& labelmaps,
                       const std::vector<ClickLabel>& clicks, int num_labels) {
  EvalReport report(num_labels);
  for (const ClickLabel& click : clicks) {
    auto it = labelmaps.find(click.photo_id);
    if (it == labelmaps.end())
      throw std::runtime_error("eval_clicks: no label map for photo '" + click.photo_id + "'");
    const LabeledPhoto& photo = it->second;
    int mx = static_cast<int>((click.point.x + 0.5) * photo.map.width / photo.photo_width);
    int my = static_cast<int>((click.point.y + 0.5) * photo.map.height / photo.photo_height);
    if (mx < 0 || my < 0 || mx >= photo.map.width || my >= photo.map.height)
      throw std::invalid_argument("eval_clicks: click outside label map on photo '" +
                                  click.photo_id + "'");
    int pred = photo.map.labels[static_cast<std::size_t>(my) * photo.map.width + mx];
    report.confusion.at(click.category, pred) += 1.0;
  }
  finalize(report);
  return report;
}

EvalReport eval_segments(const std::map<std::string, LabeledPhoto>& labelmaps,
                         const std::vector<SegmentPolygon>& segments, int num_labels) {
  EvalReport report(num_labels);
  std::vector<double> hist(num_labels);
  for (const SegmentPolygon& seg : segments) {
    auto it = labelmaps.find(seg.photo_id);
    if (it == labelmaps.end())
      throw std::runtime_error("eval_segments: no label map for photo '" + seg.photo_id + "'");
    const LabeledPhoto& photo = it->second;

    // Rasterize in label-map space: pixel centers inside the scaled polygon.
    const double sx = static_cast<double>(photo.map.width) / photo.photo_width;
    const double sy = static_cast<double>(photo.map.height) / photo.photo_height;
    std::vector<Point> scaled(seg.vertices.size());
    for (std::size_t i = 0; i < seg.vertices.size(); ++i)
      scaled[i] = {seg.vertices[i].x * sx, seg.vertices[i].y * sy};

    double min_x = scaled[0].x, max_x = scaled[0].x, min_y = scaled[0].y, max_y = scaled[0].y;
    for (const Point& v : scaled) {
      min_x = std::min(min_x, v.x);
      max_x = std::max(max_x, v.x);
      min_y = std::min(min_y, v.y);
      max_y = std::max(max_y, v.y);
    }

    std::fill(hist.begin(), hist.end(), 0.0);
    long long inside = 0;
    int y0 = std::max(0, static_cast<int>(std::floor(min_y - 0.5)));
    int y1 = std::min(photo.map.height - 1, static_cast<int>(std::ceil(max_y)));
    int x0 = std::max(0, static_cast<int>(std::floor(min_x - 0.5)));
    int x1 = std::min(photo.map.width - 1, static_cast<int>(std::ceil(max_x)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (!point_in_polygon(x + 0.5, y + 0.5, scaled)) continue;
        ++inside;
        hist[photo.map.labels[static_cast<std::size_t>(y) * photo.map.width + x]] += 1.0;
      }

    if (inside == 0) {
      ++report.skipped_segments;
      continue;
    }
    for (int p = 0; p < num_labels; ++p)
      report.confusion.at(seg.category, p) += hist[p] / static_cast<double>(inside);
  }
  finalize(report);
  return report;
}

ProbabilityMap ensemble_combine(const std::vector<ProbabilityMap>& maps, EnsembleMode mode) {
  if (maps.empty()) throw std::invalid_argument("ensemble_combine: no maps");
  const ProbabilityMap& first = maps[0];
  for (const ProbabilityMap& m : maps)
    if (m.rows != first.rows || m.cols != first.cols || m.labels != first.labels)
      throw std::invalid_argument("ensemble_combine: grid mismatch");

  ProbabilityMap out(first.rows, first.cols, first.labels);
  out.origin_x = first.origin_x;
  out.origin_y = first.origin_y;
  out.spacing_x = first.spacing_x;
  out.spacing_y = first.spacing_y;

  const double inv = 1.0 / maps.size();
  std::vector<double> acc(first.labels);
  for (int r = 0; r < first.rows; ++r)
    for (int c = 0; c < first.cols; ++c) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (const ProbabilityMap& m : maps)
        for (int l = 0; l < first.labels; ++l) {
          double p = m.at(r, c, l);
          if (mode == EnsembleMode::Arithmetic)
            acc[l] += p * inv;
          else
            acc[l] += std::log(std::max(p, 1e-12f)) * inv;
        }
      double sum = 0.0;
      for (int l = 0; l < first.labels; ++l) {
        if (mode == EnsembleMode::Geometric) acc[l] = std::exp(acc[l]);
        sum += acc[l];
      }
      for (int l = 0; l < first.labels; ++l)
        out.at(r, c, l) = static_cast<float>(acc[l] / sum);
    }
  return out;
}

GridSearchResult grid_search_crf(const std::vector<GridSearchPhoto>& validation,
                                 const std::vector<CrfParams>& grid, Objective objective,
                                 CrfBackend backend, int jobs) {
  if (grid.empty()) throw std::invalid_argument("grid_search_crf: empty grid");
  if (validation.empty()) throw std::invalid_argument("grid_search_crf: no validation photos");

  auto evaluate = [&](const CrfParams& params) {
    std::map<std::string, LabeledPhoto> maps;
    for (const GridSearchPhoto& photo : validation) {
      PixelFeatures features = build_features(photo.lab, params);
      UnaryPotentials unary =
          unary_from_probmap(photo.unary, photo.lab.width, photo.lab.height);
      MarginalField q =
          meanfield_infer(unary, features, params.w_p, params.iterations, backend);
      maps.emplace(photo.photo_id,
                   LabeledPhoto{map_labels(q), photo.photo_width, photo.photo_height});
    }
    if (objective == Objective::SegmentClassAcc) {
      std::vector<SegmentPolygon> segments;
      for (const GridSearchPhoto& p : validation)
        segments.insert(segments.end(), p.segments.begin(), p.segments.end());
      return eval_segments(maps, segments);
    }
    std::vector<ClickLabel> clicks;
    for (const GridSearchPhoto& p : validation)
      clicks.insert(clicks.end(), p.clicks.begin(), p.clicks.end());
    return eval_clicks(maps, clicks);
  };

  std::vector<EvalReport> reports(grid.size(), EvalReport(0));
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) reports[i] = evaluate(grid[i]);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
      for (;;) {
        std::size_t i = cursor.fetch_add(1);
        if (i >= grid.size()) return;
        reports[i] = evaluate(grid[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (reports[i].mean_class_accuracy > reports[best].mean_class_accuracy) best = i;

  return {grid[best], std::move(reports[best]), reports[best].mean_class_accuracy, best};
}

void write_report_json(const std::string& path, const EvalReport& report) {
  nlohmann::json j;
  j["version"] = 1;
  j["mean_class_accuracy"] = report.mean_class_accuracy;
  j["total_accuracy"] = report.total_accuracy;
  j["skipped_segments"] = report.skipped_segments;
  nlohmann::json per = nlohmann::json::object();
  for (int c = 0; c < report.confusion.n; ++c) {
    std::string key = report.confusion.n == kNumCategories ? category_names()[c]
                                                           : std::to_string(c);
    if (report.per_category[c] < 0.0)
      per[key] = nullptr;
    else
      per[key] = report.per_category[c];
  }
  j["per_category"] = per;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& confusion) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "true\\predicted";
  for (int p = 0; p < confusion.n; ++p) {
    std::string name =
        confusion.n == kNumCategories ? category_names()[p] : std::to_string(p);
    out << "," << name;
  }
  out << "\n";
  for (int t = 0; t < confusion.n; ++t) {
    out << (confusion.n == kNumCategories ? category_names()[t] : std::to_string(t));
    for (int p = 0; p < confusion.n; ++p) out << "," << confusion.at(t, p);
    out << "\n";
  }
}

}  // namespace mincseg
