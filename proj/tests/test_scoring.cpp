#include <catch2/catch.hpp>

#include "formpair/rng.hpp"
#include "formpair/scoring.hpp"

using namespace formpair;

namespace {

TextBox make_box(const std::string& id, Rect r, TextClass cls, double nn = 0) {
  TextBox b;
  b.id = id;
  b.rect = r;
  b.cls = cls;
  b.p_preprinted = cls == TextClass::PrePrinted ? 1.0 : 0.0;
  b.p_input = 1.0 - b.p_preprinted;
  b.nn_pred = nn;
  return b;
}

CandidatePair candidate(const std::string& a, const std::string& b) {
  CandidatePair cp;
  cp.a_id = a;
  cp.b_id = b;
  return cp;
}

}  // namespace

TEST_CASE("extract_features on an identical pair") {
  const TextBox a = make_box("a", {10, 20, 110, 70}, TextClass::PrePrinted);
  const auto f = extract_features(a, a);
  CHECK(f[feature::kDxCenter] == 0.0);
  CHECK(f[feature::kDyCenter] == 0.0);
  CHECK(f[feature::kDistTopLeft] == 0.0);
  CHECK(f[feature::kDistTopRight] == 0.0);
  CHECK(f[feature::kDistBottomLeft] == 0.0);
  CHECK(f[feature::kDistBottomRight] == 0.0);
}

TEST_CASE("extract_features hand-computed values") {
  const TextBox a = make_box("a", {0, 0, 100, 50}, TextClass::PrePrinted, 2.0);
  const TextBox b = make_box("b", {200, 0, 300, 50}, TextClass::Input, 1.0);
  const auto f = extract_features(a, b);
  CHECK(f[feature::kDxCenter] == Approx(-200.0));
  CHECK(f[feature::kDyCenter] == 0.0);
  CHECK(f[feature::kDistTopLeft] == Approx(200.0));
  CHECK(f[feature::kDistTopRight] == Approx(200.0));
  CHECK(f[feature::kHeightA] == Approx(1.0));
  CHECK(f[feature::kWidthA] == Approx(0.25));
  CHECK(f[feature::kHeightB] == Approx(1.0));
  CHECK(f[feature::kWidthB] == Approx(0.25));
  CHECK(f[feature::kProbPreA] == 1.0);
  CHECK(f[feature::kProbInputB] == 1.0);
  CHECK(f[feature::kNeighborsA] == 2.0);
  CHECK(f[feature::kNeighborsB] == 1.0);
}

TEST_CASE("orient_pair puts the pre-printed box first") {
  const TextBox pre = make_box("z", {0, 0, 10, 10}, TextClass::PrePrinted);
  const TextBox in = make_box("a", {20, 0, 30, 10}, TextClass::Input);
  CHECK(orient_pair(in, pre).first->id == "z");
  CHECK(orient_pair(pre, in).first->id == "z");
  const TextBox in2 = make_box("b", {40, 0, 50, 10}, TextClass::Input);
  CHECK(orient_pair(in2, in).first->id == "a");
}

TEST_CASE("extract_features is invariant to translating the pair") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const double x = rng.uniform(0, 500), y = rng.uniform(0, 500);
    TextBox a = make_box("a", {x, y, x + 120, y + 30}, TextClass::PrePrinted, 1);
    TextBox b = make_box("b", {x + 150, y - 10, x + 260, y + 25}, TextClass::Input, 1);
    const auto f0 = extract_features(a, b);
    const double tx = rng.uniform(-200, 200), ty = rng.uniform(-200, 200);
    for (TextBox* box : {&a, &b}) {
      box->rect.x_min += tx;
      box->rect.x_max += tx;
      box->rect.y_min += ty;
      box->rect.y_max += ty;
    }
    const auto f1 = extract_features(a, b);
    for (int i = 0; i < 16; ++i) CHECK(f1[i] == Approx(f0[i]).margin(1e-9));
  }
}

TEST_CASE("score_distance reproduces the closed form") {
  std::map<std::string, TextBox> boxes;
  boxes["l"] = make_box("l", {0, 0, 10, 10}, TextClass::PrePrinted);
  boxes["v1"] = make_box("v1", {10, 0, 20, 10}, TextClass::Input);   // d = 10
  boxes["v2"] = make_box("v2", {20, 0, 30, 10}, TextClass::Input);   // d = 20
  boxes["v3"] = make_box("v3", {30, 0, 40, 10}, TextClass::Input);   // d = 30
  const std::vector<CandidatePair> pairs = {candidate("l", "v1"), candidate("l", "v2"),
                                            candidate("l", "v3")};
  const auto s = score_distance(pairs, boxes);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == Approx(1.0));
  CHECK(s[1] == Approx(0.5));
  CHECK(s[2] == Approx(0.0));
}

TEST_CASE("score_distance degenerate page scores ones") {
  std::map<std::string, TextBox> boxes;
  boxes["l"] = make_box("l", {0, 0, 10, 10}, TextClass::PrePrinted);
  boxes["v"] = make_box("v", {20, 0, 30, 10}, TextClass::Input);
  const auto s = score_distance({candidate("l", "v")}, boxes);
  REQUIRE(s.size() == 1);
  CHECK(s[0] == 1.0);
  CHECK(score_distance({}, boxes).empty());
}

TEST_CASE("score_distance preserves distance order") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, TextBox> boxes;
    std::vector<CandidatePair> pairs;
    std::vector<double> dist;
    boxes["l"] = make_box("l", {0, 0, 10, 10}, TextClass::PrePrinted);
    const int n = 2 + static_cast<int>(rng.uniform_index(6));
    for (int i = 0; i < n; ++i) {
      const double x = rng.uniform(20, 600);
      const double y = rng.uniform(-300, 300);
      const std::string id = "v" + std::to_string(i);
      boxes[id] = make_box(id, {x, y, x + 10, y + 10}, TextClass::Input);
      pairs.push_back(candidate("l", id));
      dist.push_back(std::hypot(x + 5 - 5, y + 5 - 5));
    }
    const auto s = score_distance(pairs, boxes);
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (dist[i] < dist[j]) CHECK(s[i] > s[j]);
      }
    }
  }
}

TEST_CASE("heuristic_raw hand-computed example") {
  // Equal heights; the label's right edge touches the value's left edge at
  // the same y; value center 100px right; w_i = w_j = 100.
  const TextBox label = make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted);
  const TextBox value = make_box("v", {100, 0, 200, 30}, TextClass::Input);
  // g4 = 1, g5 = 0, g6 = (50 - 150)/100 = -1  =>  s = 1 - 1 - 0 + 1 = 1
  CHECK(heuristic_raw(label, value) == Approx(1.0));
}

TEST_CASE("heuristic_raw height mismatch lowers the score by g4") {
  const TextBox label = make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted);
  const TextBox value = make_box("v", {100, 0, 200, 30}, TextClass::Input);
  // Double the value height symmetric about its center: same centers, g4 = 2.
  const TextBox tall = make_box("v", {100, -15, 200, 45}, TextClass::Input);
  CHECK(heuristic_raw(label, tall) == Approx(heuristic_raw(label, value) - 1.0));
}

TEST_CASE("heuristic penalizes the value lying left of the label") {
  const TextBox label = make_box("l", {200, 0, 300, 30}, TextClass::PrePrinted);
  const TextBox right = make_box("v", {320, 0, 420, 30}, TextClass::Input);
  const TextBox left = make_box("v", {-20, 0, 80, 30}, TextClass::Input);
  CHECK(heuristic_raw(label, right) > heuristic_raw(label, left));
}

TEST_CASE("heuristic_raw rejects degenerate boxes") {
  TextBox label = make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted);
  TextBox flat = make_box("v", {100, 0, 200, 30}, TextClass::Input);
  flat.rect.y_max = flat.rect.y_min;
  CHECK_THROWS_AS(heuristic_raw(label, flat), InvalidInputError);
}

TEST_CASE("heuristic_raw is translation invariant") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = rng.uniform(0, 300), y = rng.uniform(0, 300);
    TextBox label = make_box("l", {x, y, x + 120, y + 30}, TextClass::PrePrinted);
    TextBox value =
        make_box("v", {x + rng.uniform(100, 250), y + rng.uniform(-40, 40), 0, 0},
                 TextClass::Input);
    value.rect.x_max = value.rect.x_min + 90;
    value.rect.y_max = value.rect.y_min + 25;
    const double s0 = heuristic_raw(label, value);
    const double tx = rng.uniform(-500, 500), ty = rng.uniform(-500, 500);
    for (TextBox* box : {&label, &value}) {
      box->rect.x_min += tx;
      box->rect.x_max += tx;
      box->rect.y_min += ty;
      box->rect.y_max += ty;
    }
    CHECK(heuristic_raw(label, value) == Approx(s0).margin(1e-9));
  }
}

TEST_CASE("heuristic_raw decreases strictly as height mismatch grows") {
  const TextBox label = make_box("l", {0, 0, 100, 30}, TextClass::PrePrinted);
  double prev = std::numeric_limits<double>::infinity();
  for (double h = 30; h <= 120; h += 10) {
    const double half = h / 2;
    const TextBox value = make_box("v", {130, 15 - half, 230, 15 + half}, TextClass::Input);
    const double s = heuristic_raw(label, value);
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("score_heuristic normalizes per page into [0, 1]") {
  std::map<std::string, TextBox> boxes;
  boxes["l1"] = make_box("l1", {0, 0, 100, 30}, TextClass::PrePrinted);
  boxes["v1"] = make_box("v1", {120, 0, 220, 30}, TextClass::Input);
  boxes["v2"] = make_box("v2", {400, 200, 500, 260}, TextClass::Input);
  const auto scores =
      score_heuristic({candidate("l1", "v1"), candidate("l1", "v2")}, boxes);
  REQUIRE(scores.normalized.size() == 2);
  CHECK(scores.normalized[0] == 1.0);
  CHECK(scores.normalized[1] == 0.0);
  CHECK(scores.raw[0] > scores.raw[1]);

  const auto single = score_heuristic({candidate("l1", "v1")}, boxes);
  CHECK(single.normalized[0] == 1.0);
}
