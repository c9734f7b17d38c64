#pragma once

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "formpair/candidates.hpp"
#include "formpair/geometry.hpp"

namespace formpair {

// Fixed-order 16-dim spatial feature vector. The order is part of the model
// file contract; loaders reject models trained with a different order.
using FeatureVector = std::array<double, 16>;

namespace feature {
enum Index {
  kDxCenter = 0,
  kDyCenter,
  kDistTopLeft,
  kDistTopRight,
  kDistBottomLeft,
  kDistBottomRight,
  kHeightA,  // h_a / 50
  kWidthA,   // w_a / 400
  kHeightB,  // h_b / 50
  kWidthB,   // w_b / 400
  kProbPreA,
  kProbInputA,
  kProbPreB,
  kProbInputB,
  kNeighborsA,
  kNeighborsB,
};

inline const std::array<std::string, 16>& names() {
  static const std::array<std::string, 16> n = {
      "dx_center",   "dy_center",   "d_tl",      "d_tr",
      "d_bl",        "d_br",        "h_a/50",    "w_a/400",
      "h_b/50",      "w_b/400",     "p_pre_a",   "p_input_a",
      "p_pre_b",     "p_input_b",   "nn_a",      "nn_b"};
  return n;
}
}  // namespace feature

namespace detail {
inline double dist(double x0, double y0, double x1, double y1) {
  return std::hypot(x1 - x0, y1 - y0);
}
}  // namespace detail

// Orders a pair for feature extraction: the pre-printed box takes slot a when
// the classes differ, otherwise the lexicographically smaller id does.
inline std::pair<const TextBox*, const TextBox*> orient_pair(const TextBox& x,
                                                             const TextBox& y) {
  if (x.cls != y.cls) {
    return x.cls == TextClass::PrePrinted ? std::make_pair(&x, &y)
                                          : std::make_pair(&y, &x);
  }
  return x.id <= y.id ? std::make_pair(&x, &y) : std::make_pair(&y, &x);
}

inline FeatureVector extract_features(const TextBox& a, const TextBox& b) {
  const Rect& ra = a.rect;
  const Rect& rb = b.rect;
  FeatureVector f{};
  f[feature::kDxCenter] = ra.center_x() - rb.center_x();
  f[feature::kDyCenter] = ra.center_y() - rb.center_y();
  f[feature::kDistTopLeft] = detail::dist(ra.x_min, ra.y_min, rb.x_min, rb.y_min);
  f[feature::kDistTopRight] = detail::dist(ra.x_max, ra.y_min, rb.x_max, rb.y_min);
  f[feature::kDistBottomLeft] = detail::dist(ra.x_min, ra.y_max, rb.x_min, rb.y_max);
  f[feature::kDistBottomRight] = detail::dist(ra.x_max, ra.y_max, rb.x_max, rb.y_max);
  f[feature::kHeightA] = ra.height() / 50.0;
  f[feature::kWidthA] = ra.width() / 400.0;
  f[feature::kHeightB] = rb.height() / 50.0;
  f[feature::kWidthB] = rb.width() / 400.0;
  f[feature::kProbPreA] = a.p_preprinted;
  f[feature::kProbInputA] = a.p_input;
  f[feature::kProbPreB] = b.p_preprinted;
  f[feature::kProbInputB] = b.p_input;
  f[feature::kNeighborsA] = a.nn_pred;
  f[feature::kNeighborsB] = b.nn_pred;
  return f;
}

// Inverse-distance baseline: s = 1 - (d - d_min) / (d_max - d_min) with the
// extremes taken over this page's candidate pairs. All scores are 1 when the
// page has a single distance value.
inline std::vector<double> score_distance(
    const std::vector<CandidatePair>& pairs,
    const std::map<std::string, TextBox>& boxes) {
  if (pairs.empty()) return {};
  std::vector<double> d(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Rect& a = boxes.at(pairs[i].a_id).rect;
    const Rect& b = boxes.at(pairs[i].b_id).rect;
    d[i] = detail::dist(a.center_x(), a.center_y(), b.center_x(), b.center_y());
  }
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double d_min = *lo, d_max = *hi;
  std::vector<double> s(pairs.size(), 1.0);
  if (d_max > d_min) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      s[i] = 1.0 - (d[i] - d_min) / (d_max - d_min);
    }
  }
  return s;
}

// Raw adapted heuristic score for a (label, value) pair:
//   s = 1 - g4 - g5 - g6
// g4 penalizes height mismatch, g5 the gap between the label's right edge and
// the value's left edge, g6 the label lying right of the value.
inline double heuristic_raw(const TextBox& label, const TextBox& value) {
  const Rect& li = label.rect;
  const Rect& vj = value.rect;
  const double h_i = li.height(), h_j = vj.height();
  const double w_i = li.width(), w_j = vj.width();
  if (h_i <= 0 || h_j <= 0 || w_i <= 0 || w_j <= 0) {
    throw InvalidInputError("heuristic_raw: box with zero height or width");
  }
  const double g4 = std::max(h_i, h_j) / std::min(h_i, h_j);
  const double delta =
      detail::dist(li.x_max, li.center_y(), vj.x_min, vj.center_y());
  const double g5 = delta > 2.0 * w_i ? delta / w_i : std::min(1.0, delta / w_i);
  const double g6 = (li.center_x() - vj.center_x()) / w_j;
  return 1.0 - g4 - g5 - g6;
}

struct HeuristicScores {
  std::vector<double> raw;
  std::vector<double> normalized;  // per-page min-max of raw, in [0, 1]
};

// Adapted heuristic scoring over a page's candidate pairs. Pairs must be
// opposite-class; the pre-printed box is the label.
inline HeuristicScores score_heuristic(
    const std::vector<CandidatePair>& pairs,
    const std::map<std::string, TextBox>& boxes) {
  HeuristicScores out;
  if (pairs.empty()) return out;
  out.raw.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const TextBox& a = boxes.at(pairs[i].a_id);
    const TextBox& b = boxes.at(pairs[i].b_id);
    const auto [label, value] = orient_pair(a, b);
    out.raw[i] = heuristic_raw(*label, *value);
  }
  const auto [lo, hi] = std::minmax_element(out.raw.begin(), out.raw.end());
  const double r_min = *lo, r_max = *hi;
  out.normalized.assign(pairs.size(), 1.0);
  if (r_max > r_min) {
    for (std::size_t i = 0; i < out.raw.size(); ++i) {
      out.normalized[i] = (out.raw[i] - r_min) / (r_max - r_min);
    }
  }
  return out;
}

}  // namespace formpair
