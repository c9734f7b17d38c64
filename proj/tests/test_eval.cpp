#include <catch2/catch.hpp>

#include "formpair/eval.hpp"
#include "formpair/rng.hpp"

using namespace formpair;

namespace {

TextBox make_box(const std::string& id, Rect r, TextClass cls, double conf = 1.0) {
  TextBox b;
  b.id = id;
  b.rect = r;
  b.cls = cls;
  b.confidence = conf;
  return b;
}

}  // namespace

TEST_CASE("perfect predictions match one-to-one at IoU 1") {
  const std::vector<TextBox> gt = {
      make_box("g1", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("g2", {150, 0, 250, 30}, TextClass::Input)};
  const auto m = match_detections(gt, gt, 0.5);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    CHECK(m.pred_to_gt[i] == static_cast<int>(i));
    CHECK(m.pred_iou[i] == 1.0);
  }
}

TEST_CASE("only the higher-confidence duplicate matches") {
  const std::vector<TextBox> gt = {make_box("g", {0, 0, 100, 30}, TextClass::Input)};
  const std::vector<TextBox> pred = {
      make_box("p_low", {2, 0, 102, 30}, TextClass::Input, 0.6),
      make_box("p_high", {0, 0, 100, 30}, TextClass::Input, 0.9)};
  const auto m = match_detections(pred, gt, 0.5);
  CHECK(m.pred_to_gt[0] == -1);  // verified optimal too: one GT, one credit
  CHECK(m.pred_to_gt[1] == 0);
}

TEST_CASE("class mismatch prevents matching even at IoU 1") {
  const std::vector<TextBox> gt = {make_box("g", {0, 0, 100, 30}, TextClass::Input)};
  const std::vector<TextBox> pred = {
      make_box("p", {0, 0, 100, 30}, TextClass::PrePrinted, 0.9)};
  const auto m = match_detections(pred, gt, 0.5);
  CHECK(m.pred_to_gt[0] == -1);
}

TEST_CASE("relationships: perfect inputs give all TPs and no FNs") {
  const std::vector<TextBox> boxes = {
      make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("v", {150, 0, 250, 30}, TextClass::Input)};
  const auto m = match_detections(boxes, boxes, 0.5);
  const RelationshipSet gt_rels = {{"l", "v"}};
  const auto r = score_relationships({{"l", "v", 0.9}}, m, boxes, boxes, gt_rels);
  CHECK(r.tp == 1);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
}

TEST_CASE("relationships between unrelated GTs are false positives") {
  const std::vector<TextBox> boxes = {
      make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("v", {150, 0, 250, 30}, TextClass::Input),
      make_box("v2", {300, 0, 400, 30}, TextClass::Input)};
  const auto m = match_detections(boxes, boxes, 0.5);
  const RelationshipSet gt_rels = {{"l", "v"}};
  const auto r = score_relationships({{"l", "v2", 0.9}}, m, boxes, boxes, gt_rels);
  CHECK(r.tp == 0);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
}

TEST_CASE("a GT relationship is credited to the highest-scoring claimant once") {
  // Two predicted boxes land on the same GT input box; both predicted pairs
  // resolve to the same GT relationship.
  const std::vector<TextBox> gt = {
      make_box("L", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("V", {150, 0, 250, 30}, TextClass::Input)};
  const std::vector<TextBox> pred = {
      make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted, 0.9),
      make_box("v1", {150, 0, 250, 30}, TextClass::Input, 0.9),
      make_box("v2", {148, 0, 252, 30}, TextClass::Input, 0.8)};
  // v2 cannot match V (v1 takes it), so the lower-scoring pair is FP.
  const auto m = match_detections(pred, gt, 0.5);
  const RelationshipSet gt_rels = {{"L", "V"}};
  const auto r =
      score_relationships({{"l", "v1", 0.9}, {"l", "v2", 0.7}}, m, pred, gt, gt_rels);
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 0);
  CHECK(r.is_tp[0] == 1);
  CHECK(r.is_tp[1] == 0);
}

TEST_CASE("average precision on the hand-computed ranking") {
  const std::vector<RankedItem> items = {
      {0.9, true, "a"}, {0.8, false, "b"}, {0.7, true, "c"}};
  CHECK(average_precision(items, 2) == Approx(5.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("average precision edge cases") {
  CHECK(average_precision({{0.9, true, "a"}, {0.8, true, "b"}}, 2) == 1.0);
  CHECK(average_precision({{0.9, false, "a"}, {0.8, false, "b"}}, 2) == 0.0);
  CHECK(average_precision({}, 0) == 0.0);
  // Missed positives cap the recall term.
  CHECK(average_precision({{0.9, true, "a"}}, 2) == Approx(0.5));
}

TEST_CASE("average precision is invariant under monotone score transforms") {
  Rng rng(81);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RankedItem> items;
    const int n = 1 + static_cast<int>(rng.uniform_index(20));
    int positives = 0;
    for (int i = 0; i < n; ++i) {
      RankedItem it;
      it.score = rng.uniform();
      it.is_tp = rng.bernoulli(0.4);
      it.tie_key = "k" + std::to_string(i);
      positives += it.is_tp;
      items.push_back(it);
    }
    const int total = positives + static_cast<int>(rng.uniform_index(4));
    const double base = average_precision(items, total);
    auto warped = items;
    for (auto& it : warped) it.score = 3.0 * it.score * it.score * it.score - 0.5;
    CHECK(average_precision(warped, total) == Approx(base).margin(1e-12));
  }
}

TEST_CASE("adjusted scores preserve AP relative to the accepted-first ordering") {
  // Subtracting 1 from rejected candidates keeps within-group order and puts
  // every accepted candidate first; AP must equal the AP of that ranking.
  Rng rng(82);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(15));
    std::vector<RankedItem> adjusted;
    std::vector<std::pair<double, RankedItem>> sortable;
    int positives = 0;
    for (int i = 0; i < n; ++i) {
      const double p = rng.uniform(0.01, 0.99);
      const bool accepted = rng.bernoulli(0.5);
      RankedItem it;
      it.score = accepted ? p : p - 1.0;
      it.is_tp = rng.bernoulli(0.5);
      it.tie_key = "k" + std::to_string(i);
      positives += it.is_tp;
      adjusted.push_back(it);
      sortable.push_back({accepted ? 1.0 + p : p, it});
    }
    std::sort(sortable.begin(), sortable.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<RankedItem> concat;
    double rank = static_cast<double>(n);
    for (const auto& [key, it] : sortable) {
      RankedItem copy = it;
      copy.score = rank--;  // strictly decreasing, same order
      concat.push_back(copy);
    }
    CHECK(average_precision(adjusted, positives) ==
          Approx(average_precision(concat, positives)).margin(1e-12));
  }
}

TEST_CASE("training labels: perfect boxes recover exactly the GT pairs") {
  const std::vector<TextBox> boxes = {
      make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("v", {150, 0, 250, 30}, TextClass::Input),
      make_box("v2", {300, 0, 400, 30}, TextClass::Input)};
  const RelationshipSet gt_rels = {{"l", "v"}};
  std::vector<CandidatePair> pairs(2);
  pairs[0].a_id = "l";
  pairs[0].b_id = "v";
  pairs[1].a_id = "l";
  pairs[1].b_id = "v2";
  const auto labels = assign_training_labels(pairs, boxes, boxes, gt_rels);
  CHECK(labels[0] == PairLabel::Positive);
  CHECK(labels[1] == PairLabel::Negative);
}

TEST_CASE("training labels: sub-threshold overlap on a related pair is ignored") {
  const std::vector<TextBox> gt = {
      make_box("L", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("V", {150, 0, 250, 30}, TextClass::Input)};
  // Prediction "v" has IoU 0.3 with V; its best-overlap GT is related to the
  // aligned label, so the pair carries no loss.
  const std::vector<TextBox> pred = {
      make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted, 0.9),
      make_box("v", {150, 0, 250, 100}, TextClass::Input, 0.9)};
  REQUIRE(iou(pred[1].rect, gt[1].rect) == Approx(0.3));
  const RelationshipSet gt_rels = {{"L", "V"}};
  std::vector<CandidatePair> pairs(1);
  pairs[0].a_id = "l";
  pairs[0].b_id = "v";
  const auto labels = assign_training_labels(pairs, pred, gt, gt_rels);
  CHECK(labels[0] == PairLabel::Ignore);
}

TEST_CASE("training labels: background boxes make all their pairs negative") {
  const std::vector<TextBox> gt = {
      make_box("L", {0, 0, 100, 30}, TextClass::PrePrinted),
      make_box("V", {150, 0, 250, 30}, TextClass::Input)};
  const std::vector<TextBox> pred = {
      make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted, 0.9),
      make_box("bg", {600, 600, 700, 630}, TextClass::Input, 0.9)};
  const RelationshipSet gt_rels = {{"L", "V"}};
  std::vector<CandidatePair> pairs(1);
  pairs[0].a_id = "bg";
  pairs[0].b_id = "l";
  const auto labels = assign_training_labels(pairs, pred, gt, gt_rels);
  CHECK(labels[0] == PairLabel::Negative);
}

TEST_CASE("end-to-end identity: perfect inputs give perfect metrics") {
  PageEvalInput page;
  page.page_id = "p";
  page.gt_boxes = {make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted),
                   make_box("v", {150, 0, 250, 30}, TextClass::Input),
                   make_box("l2", {0, 100, 100, 130}, TextClass::PrePrinted),
                   make_box("v2", {150, 100, 250, 130}, TextClass::Input)};
  page.pred_boxes = page.gt_boxes;
  page.gt_relationships = {{"l", "v"}, {"l2", "v2"}};
  page.scored_pairs = {{"l", "v", 1.0}, {"l2", "v2", 1.0}, {"l", "v2", 0.0},
                       {"l2", "v", 0.0}};
  const auto rep = evaluate_pages({page});
  CHECK(rep.det_map == 1.0);
  CHECK(rep.det_f_measure == 1.0);
  CHECK(rep.rel_ap_pooled == 1.0);
  CHECK(rep.rel_ap_per_image_mean == 1.0);
  CHECK(rep.rel_f_measure == 1.0);
  CHECK(rep.rel_precision == 1.0);
  CHECK(rep.rel_recall == 1.0);
}

TEST_CASE("precision and recall match direct counting on random pages") {
  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    PageEvalInput page;
    page.page_id = "p";
    // GT: one row of label/value pairs.
    const int cells = 2 + static_cast<int>(rng.uniform_index(4));
    for (int i = 0; i < cells; ++i) {
      const double x = i * 400.0;
      page.gt_boxes.push_back(
          make_box("L" + std::to_string(i), {x, 0, x + 100, 30}, TextClass::PrePrinted));
      page.gt_boxes.push_back(
          make_box("V" + std::to_string(i), {x + 150, 0, x + 250, 30}, TextClass::Input));
      page.gt_relationships.insert(
          normalize_rel("L" + std::to_string(i), "V" + std::to_string(i)));
    }
    page.pred_boxes = page.gt_boxes;
    // Random subset of all label/value pairs with random scores.
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < cells; ++j) {
        if (rng.bernoulli(0.5)) {
          page.scored_pairs.push_back({normalize_rel("L" + std::to_string(i),
                                                     "V" + std::to_string(j))
                                           .first,
                                       normalize_rel("L" + std::to_string(i),
                                                     "V" + std::to_string(j))
                                           .second,
                                       rng.uniform()});
        }
      }
    }
    const auto rep = evaluate_pages({page});
    long tp = 0, fp = 0;
    RelationshipSet claimed;
    // Direct count at threshold 0.5 with one credit per GT pair.
    std::vector<ScoredPair> at_threshold;
    for (const auto& sp : page.scored_pairs) {
      if (sp.score >= 0.5) at_threshold.push_back(sp);
    }
    std::sort(at_threshold.begin(), at_threshold.end(),
              [](const auto& a, const auto& b) { return a.score > b.score; });
    for (const auto& sp : at_threshold) {
      const auto key = normalize_rel(sp.a_id, sp.b_id);
      if (page.gt_relationships.count(key) && !claimed.count(key)) {
        claimed.insert(key);
        ++tp;
      } else {
        ++fp;
      }
    }
    const long fn = static_cast<long>(page.gt_relationships.size()) - tp;
    CHECK(rep.rel_counts.tp == tp);
    CHECK(rep.rel_counts.fp == fp);
    CHECK(rep.rel_counts.fn == fn);
    if (tp + fp > 0) {
      CHECK(rep.rel_precision == Approx(static_cast<double>(tp) / (tp + fp)));
    }
    if (tp + fn > 0) {
      CHECK(rep.rel_recall == Approx(static_cast<double>(tp) / (tp + fn)));
    }
  }
}
