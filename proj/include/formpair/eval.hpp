#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "formpair/candidates.hpp"
#include "formpair/geometry.hpp"

namespace formpair {

// Injective prediction-to-ground-truth matching for one page. Indices refer
// to the vectors passed to match_detections.
struct MatchResult {
  std::vector<int> pred_to_gt;   // -1 when unmatched
  std::vector<double> pred_iou;  // IoU of the match, 0 when unmatched
  std::vector<int> gt_to_pred;   // -1 when unmatched
};

// Greedy matching in descending prediction confidence (ties by ascending id).
// Each prediction takes the unmatched same-class GT with the highest IoU at
// or above the threshold, ties by ascending GT id.
inline MatchResult match_detections(const std::vector<TextBox>& pred,
                                    const std::vector<TextBox>& gt,
                                    double iou_threshold) {
  MatchResult m;
  m.pred_to_gt.assign(pred.size(), -1);
  m.pred_iou.assign(pred.size(), 0.0);
  m.gt_to_pred.assign(gt.size(), -1);

  std::vector<int> order(pred.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pred[a].confidence != pred[b].confidence) {
      return pred[a].confidence > pred[b].confidence;
    }
    return pred[a].id < pred[b].id;
  });

  for (const int pi : order) {
    int best_gt = -1;
    double best_iou = 0;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
      if (m.gt_to_pred[gi] >= 0 || gt[gi].cls != pred[pi].cls) continue;
      const double v = iou(pred[pi].rect, gt[gi].rect);
      if (v < iou_threshold) continue;
      if (v > best_iou ||
          (v == best_iou && best_gt >= 0 && gt[gi].id < gt[best_gt].id)) {
        best_iou = v;
        best_gt = static_cast<int>(gi);
      }
    }
    if (best_gt >= 0) {
      m.pred_to_gt[pi] = best_gt;
      m.pred_iou[pi] = best_iou;
      m.gt_to_pred[best_gt] = pi;
    }
  }
  return m;
}

// A predicted relationship with its score, referencing box ids.
struct ScoredPair {
  std::string a_id;
  std::string b_id;
  double score = 0;
};

using RelationshipSet = std::set<std::pair<std::string, std::string>>;

inline std::pair<std::string, std::string> normalize_rel(const std::string& a,
                                                         const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct RelEvalResult {
  std::vector<std::uint8_t> is_tp;  // per input pair
  int tp = 0, fp = 0, fn = 0;
};

// Labels each predicted pair TP/FP against the ground-truth relationships. A
// pair is a TP iff both endpoints are matched detections and their matched
// GTs are related; each GT relationship is credited once, to the
// highest-scoring claimant (ties by ascending pair id). FN counts unclaimed
// GT relationships.
inline RelEvalResult score_relationships(const std::vector<ScoredPair>& pairs,
                                         const MatchResult& match,
                                         const std::vector<TextBox>& pred,
                                         const std::vector<TextBox>& gt,
                                         const RelationshipSet& gt_relationships) {
  std::map<std::string, int> pred_index;
  for (std::size_t i = 0; i < pred.size(); ++i) pred_index[pred[i].id] = static_cast<int>(i);

  std::vector<int> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pairs[a].score != pairs[b].score) return pairs[a].score > pairs[b].score;
    return std::tie(pairs[a].a_id, pairs[a].b_id) < std::tie(pairs[b].a_id, pairs[b].b_id);
  });

  RelEvalResult out;
  out.is_tp.assign(pairs.size(), 0);
  RelationshipSet claimed;
  for (const int i : order) {
    const auto ita = pred_index.find(pairs[i].a_id);
    const auto itb = pred_index.find(pairs[i].b_id);
    bool tp = false;
    if (ita != pred_index.end() && itb != pred_index.end()) {
      const int ga = match.pred_to_gt[ita->second];
      const int gb = match.pred_to_gt[itb->second];
      if (ga >= 0 && gb >= 0) {
        const auto key = normalize_rel(gt[ga].id, gt[gb].id);
        if (gt_relationships.count(key) && !claimed.count(key)) {
          claimed.insert(key);
          tp = true;
        }
      }
    }
    out.is_tp[i] = tp ? 1 : 0;
  }
  out.tp = static_cast<int>(claimed.size());
  out.fp = static_cast<int>(pairs.size()) - out.tp;
  out.fn = static_cast<int>(gt_relationships.size()) - out.tp;
  return out;
}

// One entry of a ranked prediction list.
struct RankedItem {
  double score = 0;
  bool is_tp = false;
  std::string tie_key;  // deterministic secondary sort key
};

// All-point interpolated average precision:
//   AP = sum_k (R_k - R_{k-1}) * max_{k' >= k} P_{k'}
// Items are ranked by descending score, ties by ascending tie_key. Returns 0
// when there are no positives.
inline double average_precision(std::vector<RankedItem> items, int total_positives) {
  if (total_positives <= 0) return 0.0;
  std::sort(items.begin(), items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tie_key < b.tie_key;
  });

  std::vector<double> precision(items.size());
  int tp = 0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k].is_tp) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  // Suffix max turns the raw precisions into the interpolated envelope.
  for (std::size_t k = items.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (items[k].is_tp) ap += precision[k];
  }
  return ap / static_cast<double>(total_positives);
}

enum class PairLabel { Positive, Negative, Ignore };

// Training-label assignment for candidate pairs over noisy detections.
// Predictions are aligned to GT greedily at `align_iou` (class-aware). A pair
// of two aligned boxes is positive iff their GTs are related. A pair touching
// a box with zero overlap against any GT is negative. A pair whose unaligned
// boxes all sit below the alignment threshold but whose best-overlap GTs are
// related is ignored (no loss). Everything else is negative.
inline std::vector<PairLabel> assign_training_labels(
    const std::vector<CandidatePair>& pairs, const std::vector<TextBox>& pred_boxes,
    const std::vector<TextBox>& gt_boxes, const RelationshipSet& gt_relationships,
    double align_iou = 0.4) {
  const MatchResult match = match_detections(pred_boxes, gt_boxes, align_iou);

  struct BoxStatus {
    bool zero_overlap = true;     // no overlap with any GT of any class
    int aligned_gt = -1;          // greedy match at align_iou
    int best_same_class_gt = -1;  // highest-IoU same-class GT
    double best_same_class_iou = 0;
  };
  std::map<std::string, BoxStatus> status;
  for (std::size_t i = 0; i < pred_boxes.size(); ++i) {
    BoxStatus s;
    s.aligned_gt = match.pred_to_gt[i];
    for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
      const double v = iou(pred_boxes[i].rect, gt_boxes[g].rect);
      if (v > 0) s.zero_overlap = false;
      if (gt_boxes[g].cls == pred_boxes[i].cls && v > s.best_same_class_iou) {
        s.best_same_class_iou = v;
        s.best_same_class_gt = static_cast<int>(g);
      }
    }
    status[pred_boxes[i].id] = s;
  }

  std::vector<PairLabel> labels(pairs.size(), PairLabel::Negative);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const BoxStatus& sa = status.at(pairs[i].a_id);
    const BoxStatus& sb = status.at(pairs[i].b_id);

    if (sa.aligned_gt >= 0 && sb.aligned_gt >= 0) {
      const auto key = normalize_rel(gt_boxes[sa.aligned_gt].id, gt_boxes[sb.aligned_gt].id);
      labels[i] = gt_relationships.count(key) ? PairLabel::Positive : PairLabel::Negative;
      continue;
    }
    if (sa.zero_overlap || sb.zero_overlap) continue;  // negative

    // Would-be-true pairs below the alignment threshold carry no loss.
    const auto sub_threshold_ok = [&](const BoxStatus& s) {
      return s.aligned_gt >= 0 ||
             (s.best_same_class_gt >= 0 && s.best_same_class_iou < align_iou);
    };
    const auto reference_gt = [&](const BoxStatus& s) {
      return s.aligned_gt >= 0 ? s.aligned_gt : s.best_same_class_gt;
    };
    if (sub_threshold_ok(sa) && sub_threshold_ok(sb)) {
      const int ga = reference_gt(sa), gb = reference_gt(sb);
      if (ga >= 0 && gb >= 0) {
        const auto key = normalize_rel(gt_boxes[ga].id, gt_boxes[gb].id);
        if (gt_relationships.count(key)) labels[i] = PairLabel::Ignore;
      }
    }
  }
  return labels;
}

struct ClassDetectionMetrics {
  double ap = 0;
  double precision = 0, recall = 0, f_measure = 0;
  long tp = 0, fp = 0, fn = 0;
};

struct EvalCounts {
  long tp = 0, fp = 0, fn = 0;

  double precision() const { return tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0; }
  double recall() const { return tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0; }
  double f_measure() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
};

// Full evaluation report: per-class detection AP, mAP, thresholded detection
// and relationship precision/recall/F-measure, and relationship AP both
// pooled over the test set and averaged per image.
struct EvalReport {
  ClassDetectionMetrics det_preprinted, det_input;
  double det_map = 0;
  EvalCounts det_counts;  // both classes at the confidence threshold
  double det_precision = 0, det_recall = 0, det_f_measure = 0;

  double rel_ap_pooled = 0;
  double rel_ap_per_image_mean = 0;
  std::vector<std::pair<std::string, double>> rel_ap_per_image;
  EvalCounts rel_counts;
  double rel_precision = 0, rel_recall = 0, rel_f_measure = 0;
};

// Per-page inputs for report computation. `scored_pairs` feeds AP; the
// precision/recall/F-measure set is `predicted_pairs` when present (the
// optimizer's accepted set plays the thresholding role), otherwise the
// scored pairs at or above the score threshold.
struct PageEvalInput {
  std::string page_id;
  std::vector<TextBox> pred_boxes;
  std::vector<TextBox> gt_boxes;
  RelationshipSet gt_relationships;
  std::vector<ScoredPair> scored_pairs;
  std::optional<std::vector<ScoredPair>> predicted_pairs;
};

inline EvalReport evaluate_pages(const std::vector<PageEvalInput>& pages,
                                 double det_conf_threshold = 0.5,
                                 double rel_score_threshold = 0.5,
                                 double iou_threshold = 0.5) {
  EvalReport rep;

  // Detection AP per class, pooled over pages.
  for (const TextClass cls : {TextClass::PrePrinted, TextClass::Input}) {
    std::vector<RankedItem> ranked;
    int total_gt = 0;
    for (const auto& page : pages) {
      const MatchResult m = match_detections(page.pred_boxes, page.gt_boxes, iou_threshold);
      for (std::size_t i = 0; i < page.pred_boxes.size(); ++i) {
        if (page.pred_boxes[i].cls != cls) continue;
        ranked.push_back({page.pred_boxes[i].confidence, m.pred_to_gt[i] >= 0,
                          page.page_id + "/" + page.pred_boxes[i].id});
      }
      for (const auto& g : page.gt_boxes) total_gt += g.cls == cls ? 1 : 0;
    }
    auto& slot = cls == TextClass::PrePrinted ? rep.det_preprinted : rep.det_input;
    slot.ap = average_precision(std::move(ranked), total_gt);
  }
  rep.det_map = (rep.det_preprinted.ap + rep.det_input.ap) / 2.0;

  // Detection precision/recall at the confidence threshold.
  EvalCounts per_class[2];
  for (const auto& page : pages) {
    std::vector<TextBox> confident;
    for (const auto& b : page.pred_boxes) {
      if (b.confidence >= det_conf_threshold) confident.push_back(b);
    }
    const MatchResult m = match_detections(confident, page.gt_boxes, iou_threshold);
    for (std::size_t i = 0; i < confident.size(); ++i) {
      auto& c = per_class[confident[i].cls == TextClass::Input ? 1 : 0];
      (m.pred_to_gt[i] >= 0 ? c.tp : c.fp) += 1;
    }
    for (std::size_t g = 0; g < page.gt_boxes.size(); ++g) {
      if (m.gt_to_pred[g] < 0) {
        per_class[page.gt_boxes[g].cls == TextClass::Input ? 1 : 0].fn += 1;
      }
    }
  }
  const auto fill_class = [](ClassDetectionMetrics& slot, const EvalCounts& c) {
    slot.tp = c.tp;
    slot.fp = c.fp;
    slot.fn = c.fn;
    slot.precision = c.precision();
    slot.recall = c.recall();
    slot.f_measure = c.f_measure();
  };
  fill_class(rep.det_preprinted, per_class[0]);
  fill_class(rep.det_input, per_class[1]);
  rep.det_counts = {per_class[0].tp + per_class[1].tp, per_class[0].fp + per_class[1].fp,
                    per_class[0].fn + per_class[1].fn};
  rep.det_precision = rep.det_counts.precision();
  rep.det_recall = rep.det_counts.recall();
  rep.det_f_measure = rep.det_counts.f_measure();

  // Relationship AP, pooled and per image.
  std::vector<RankedItem> rel_ranked;
  int total_gt_rels = 0;
  for (const auto& page : pages) {
    const MatchResult m = match_detections(page.pred_boxes, page.gt_boxes, iou_threshold);
    const RelEvalResult r = score_relationships(page.scored_pairs, m, page.pred_boxes,
                                                page.gt_boxes, page.gt_relationships);
    std::vector<RankedItem> page_ranked;
    for (std::size_t i = 0; i < page.scored_pairs.size(); ++i) {
      const RankedItem item{page.scored_pairs[i].score, r.is_tp[i] != 0,
                            page.page_id + "/" + page.scored_pairs[i].a_id + "/" +
                                page.scored_pairs[i].b_id};
      rel_ranked.push_back(item);
      page_ranked.push_back(item);
    }
    total_gt_rels += static_cast<int>(page.gt_relationships.size());
    rep.rel_ap_per_image.emplace_back(
        page.page_id, average_precision(std::move(page_ranked),
                                        static_cast<int>(page.gt_relationships.size())));
  }
  rep.rel_ap_pooled = average_precision(std::move(rel_ranked), total_gt_rels);
  if (!rep.rel_ap_per_image.empty()) {
    double sum = 0;
    for (const auto& [_, ap] : rep.rel_ap_per_image) sum += ap;
    rep.rel_ap_per_image_mean = sum / static_cast<double>(rep.rel_ap_per_image.size());
  }

  // Relationship precision/recall at the score threshold (or over the
  // supplied predicted set).
  for (const auto& page : pages) {
    std::vector<ScoredPair> confident;
    if (page.predicted_pairs) {
      confident = *page.predicted_pairs;
    } else {
      for (const auto& sp : page.scored_pairs) {
        if (sp.score >= rel_score_threshold) confident.push_back(sp);
      }
    }
    const MatchResult m = match_detections(page.pred_boxes, page.gt_boxes, iou_threshold);
    const RelEvalResult r = score_relationships(confident, m, page.pred_boxes, page.gt_boxes,
                                                page.gt_relationships);
    rep.rel_counts.tp += r.tp;
    rep.rel_counts.fp += r.fp;
    rep.rel_counts.fn += r.fn;
  }
  rep.rel_precision = rep.rel_counts.precision();
  rep.rel_recall = rep.rel_counts.recall();
  rep.rel_f_measure = rep.rel_counts.f_measure();
  return rep;
}

}  // namespace formpair
