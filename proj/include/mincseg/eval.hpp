#pragma once

#include <map>
#include <string>
#include <vector>

#include "mincseg/annotations.hpp"
#include "mincseg/crf.hpp"
#include "mincseg/probmap.hpp"

namespace mincseg {

// Rows are true categories, columns predicted. Entries are counts for clicks
// and per-segment pixel fractions for segments (each segment contributes
// total weight 1 to its row).
struct ConfusionMatrix {
  int n = 0;
  std::vector<double> counts;

  explicit ConfusionMatrix(int n_ = kNumCategories)
      : n(n_), counts(static_cast<std::size_t>(n_) * n_, 0.0) {}
  double& at(int t, int p) { return counts[static_cast<std::size_t>(t) * n + p]; }
  double at(int t, int p) const { return counts[static_cast<std::size_t>(t) * n + p]; }
};

struct EvalReport {
  ConfusionMatrix confusion;
  double mean_class_accuracy = 0.0;
  double total_accuracy = 0.0;
  std::vector<double> per_category;  // -1 for categories with no examples
  int skipped_segments = 0;

  explicit EvalReport(int n = kNumCategories) : confusion(n) {}
};

// A predicted label map together with the photo dimensions its annotations
// are expressed in; annotation coordinates are rescaled by map/photo size.
struct LabeledPhoto {
  LabelMap map;
  int photo_width = 0, photo_height = 0;
};

// (mean class accuracy, total accuracy). Mean class averages per-category
// accuracies over categories with at least one example.
std::pair<double, double> summarize(const ConfusionMatrix& confusion);

EvalReport eval_clicks(const std::map<std::string, LabeledPhoto>& labelmaps,
                       const std::vector<ClickLabel>& clicks, int num_labels = kNumCategories);

EvalReport eval_segments(const std::map<std::string, LabeledPhoto>& labelmaps,
                         const std::vector<SegmentPolygon>& segments,
                         int num_labels = kNumCategories);

enum class EnsembleMode { Arithmetic, Geometric };

// Elementwise mean across CNN outputs; geometric uses exp(mean log p) with a
// 1e-12 floor. Both renormalize per cell.
ProbabilityMap ensemble_combine(const std::vector<ProbabilityMap>& maps, EnsembleMode mode);

enum class Objective { SegmentClassAcc, ClickClassAcc };

// Everything grid search needs per validation photo: the fused unary, the
// L*a*b* image for pairwise features, and the ground-truth annotations.
struct GridSearchPhoto {
  std::string photo_id;
  ProbabilityMap unary;
  Image lab;
  std::vector<SegmentPolygon> segments;
  std::vector<ClickLabel> clicks;
  int photo_width = 0, photo_height = 0;
};

struct GridSearchResult {
  CrfParams params;
  EvalReport report;
  double objective_value = 0.0;
  std::size_t grid_index = 0;
};

// Exhaustive evaluation of every candidate (unaries are precomputed, the CRF
// reruns per candidate); returns the argmax of the chosen objective with
// ties broken by grid order. Candidates are evaluated concurrently when
// jobs > 1; the result does not depend on jobs.
GridSearchResult grid_search_crf(const std::vector<GridSearchPhoto>& validation,
                                 const std::vector<CrfParams>& grid, Objective objective,
                                 CrfBackend backend = CrfBackend::Lattice, int jobs = 1);

// JSON report (versioned schema) and CSV confusion matrix.
void write_report_json(const std::string& path, const EvalReport& report);
void write_confusion_csv(const std::string& path, const ConfusionMatrix& confusion);

}  // namespace mincseg
