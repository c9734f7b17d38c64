#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace formpair {

// Thrown when an operation receives arguments that violate its preconditions
// (degenerate rectangles, out-of-range parameters, mismatched dimensions).
struct InvalidInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Axis-aligned rectangle in pixel coordinates, y grows downward.
struct Rect {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  double center_x() const { return (x_min + x_max) / 2; }
  double center_y() const { return (y_min + y_max) / 2; }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  bool operator==(const Rect&) const = default;
};

enum class TextClass { PrePrinted, Input };

inline const char* to_string(TextClass c) {
  return c == TextClass::PrePrinted ? "preprinted" : "input";
}

// A detected or ground-truth text line.
struct TextBox {
  std::string id;
  std::string page_id;
  Rect rect;
  TextClass cls = TextClass::PrePrinted;
  double confidence = 1.0;
  double p_preprinted = 1.0;  // class probabilities as emitted by a detector
  double p_input = 0.0;
  double nn_pred = 0.0;  // predicted number of neighbors (relationships)
};

inline double iou(const Rect& a, const Rect& b) {
  if (!a.valid() || !b.valid()) {
    throw InvalidInputError("iou: rectangle with non-positive area");
  }
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

// IoU of two (w, h) shapes placed on a common center, the anchor-clustering
// distance of YOLOv2.
inline double shape_iou(double w1, double h1, double w2, double h2) {
  const double inter = std::min(w1, w2) * std::min(h1, h2);
  return inter / (w1 * h1 + w2 * h2 - inter);
}

namespace detail {

inline bool higher_confidence(const TextBox& a, const TextBox& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.id < b.id;
}

}  // namespace detail

// Confidence thresholding followed by greedy per-class suppression. Output is
// sorted by descending confidence, ties by ascending id.
inline std::vector<TextBox> nms(const std::vector<TextBox>& boxes,
                                double conf_threshold, double iou_threshold) {
  std::vector<TextBox> sorted;
  sorted.reserve(boxes.size());
  for (const auto& b : boxes) {
    if (b.confidence >= conf_threshold) sorted.push_back(b);
  }
  std::sort(sorted.begin(), sorted.end(), detail::higher_confidence);

  std::vector<TextBox> kept;
  for (const auto& b : sorted) {
    bool suppressed = false;
    for (const auto& k : kept) {
      if (k.cls == b.cls && iou(k.rect, b.rect) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(b);
  }
  return kept;
}

struct AnchorSet {
  std::vector<std::pair<double, double>> anchors;  // (width, height)
  int k = 0;
};

// k-means over (w, h) shapes with distance 1 - shape_iou. The update step
// moves each centroid to the component-wise mean of its assigned shapes,
// keeping the previous centroid when the mean would lower the cluster's
// summed IoU (the mean optimizes squared distance, not IoU distance, so an
// unguarded move can regress) or when the cluster is empty. Stops when
// assignments are stable or after 300 iterations. `mean_iou_trace`, when
// given, records the mean IoU between shapes and their assigned anchor after
// every assignment step; the sequence is non-decreasing.
inline AnchorSet cluster_anchors(
    const std::vector<std::pair<double, double>>& shapes, int k,
    const std::vector<std::pair<double, double>>& seeds,
    std::vector<double>* mean_iou_trace = nullptr) {
  if (k < 1) throw InvalidInputError("cluster_anchors: k must be >= 1");
  if (static_cast<int>(shapes.size()) < k) {
    throw InvalidInputError("cluster_anchors: fewer shapes than clusters");
  }
  if (static_cast<int>(seeds.size()) != k) {
    throw InvalidInputError("cluster_anchors: need exactly k seeds");
  }
  for (const auto& [w, h] : shapes) {
    if (w <= 0 || h <= 0) {
      throw InvalidInputError("cluster_anchors: non-positive shape");
    }
  }

  std::vector<std::pair<double, double>> centroids = seeds;
  std::vector<int> assignment(shapes.size(), -1);

  for (int iter = 0; iter < 300; ++iter) {
    // Assign each shape to the max-IoU (min-distance) centroid.
    bool changed = false;
    double iou_sum = 0;
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      int best = 0;
      double best_iou = -1;
      for (int c = 0; c < k; ++c) {
        const double v = shape_iou(shapes[i].first, shapes[i].second,
                                   centroids[c].first, centroids[c].second);
        if (v > best_iou) {
          best_iou = v;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
      iou_sum += best_iou;
    }
    if (mean_iou_trace) {
      mean_iou_trace->push_back(iou_sum / static_cast<double>(shapes.size()));
    }
    if (!changed) break;

    // Update each centroid to the mean of its members.
    std::vector<double> wsum(k, 0), hsum(k, 0);
    std::vector<int> count(k, 0);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      wsum[assignment[i]] += shapes[i].first;
      hsum[assignment[i]] += shapes[i].second;
      ++count[assignment[i]];
    }
    std::vector<double> old_sum(k, 0), new_sum(k, 0);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const int c = assignment[i];
      old_sum[c] += shape_iou(shapes[i].first, shapes[i].second, centroids[c].first,
                              centroids[c].second);
      new_sum[c] += shape_iou(shapes[i].first, shapes[i].second, wsum[c] / count[c],
                              hsum[c] / count[c]);
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0 && new_sum[c] >= old_sum[c]) {
        centroids[c] = {wsum[c] / count[c], hsum[c] / count[c]};
      }
    }
  }

  AnchorSet out;
  out.anchors = std::move(centroids);
  out.k = k;
  return out;
}

}  // namespace formpair
