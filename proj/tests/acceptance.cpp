// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure. Criteria 6 and 7 train the spatial classifier on a synthetic
// train split and compare scorers on a held-out split.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "formpair/eval.hpp"
#include "formpair/io.hpp"
#include "formpair/mlp.hpp"
#include "formpair/optimizer.hpp"
#include "formpair/pipeline.hpp"
#include "formpair/rng.hpp"
#include "formpair/synth.hpp"

using namespace formpair;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PairingProblem random_problem(Rng& rng, int max_r) {
  PairingProblem prob;
  const int n_boxes = 2 + static_cast<int>(rng.uniform_index(6));
  const int n_r = 1 + static_cast<int>(rng.uniform_index(max_r));
  const double n_choices[] = {0, 0.5, 1, 2};
  const double c_choices[] = {0, 0.25, 1, 25};
  const double t_choices[] = {0.5, 0.7};
  for (int b = 0; b < n_boxes; ++b) prob.n_target.push_back(n_choices[rng.uniform_index(4)]);
  for (int r = 0; r < n_r; ++r) {
    prob.p.push_back(rng.uniform());
    const int b1 = static_cast<int>(rng.uniform_index(n_boxes));
    int b2 = static_cast<int>(rng.uniform_index(n_boxes));
    while (b2 == b1) b2 = static_cast<int>(rng.uniform_index(n_boxes));
    prob.touches.emplace_back(b1, b2);
  }
  prob.c = c_choices[rng.uniform_index(4)];
  prob.T = t_choices[rng.uniform_index(2)];
  return prob;
}

// --------------------------------------------------------------------------

void criterion_1_optimizer_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  int mismatches = 0;
  const int instances = 220;
  for (int i = 0; i < instances; ++i) {
    const PairingProblem prob = random_problem(rng, 15);
    const auto bf = solve_bruteforce(prob);
    const auto bnb = solve_bnb(prob);
    if (std::abs(bnb.objective - bf.objective) > 1e-9 || bnb.x != bf.x) ++mismatches;
  }
  const double dt = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "optimizer exactness: %d/%d instances matched brute force (%.1f s)",
                instances - mismatches, instances, dt);
  report(1, mismatches == 0 && dt < 60.0, buf);
}

void criterion_2_threshold_reduction() {
  Rng rng(1002);
  int bad = 0;
  for (int i = 0; i < 100; ++i) {
    PairingProblem prob = random_problem(rng, 15);
    prob.c = 0;
    const auto dec = solve_bnb(prob);
    for (int r = 0; r < prob.num_candidates(); ++r) {
      if (dec.x[r] != (prob.p[r] > prob.T ? 1 : 0)) {
        ++bad;
        break;
      }
    }
  }
  report(2, bad == 0,
         "c = 0 reduces to thresholding p > T on 100/100 random instances");
}

void criterion_3_gradients() {
  Rng data_rng(1003);
  double worst = 0;
  for (int draw = 0; draw < 5; ++draw) {
    Rng init(2000 + draw);
    auto model = SpatialClassifier::init(16, 8, init);
    const int n = 6;
    Matrix batch(n, 16);
    for (double& v : batch.data) v = data_rng.uniform(-2, 2);
    std::vector<double> labels(n);
    for (double& y : labels) y = data_rng.bernoulli(0.5) ? 1.0 : 0.0;
    worst = std::max(worst, gradient_check(model, batch, labels, 3000 + draw));
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "backprop vs central differences: max relative error %.3g (<= 1e-4)", worst);
  report(3, worst <= 1e-4, buf);
}

void criterion_4_metric_oracle() {
  const double ap =
      average_precision({{0.9, true, "a"}, {0.8, false, "b"}, {0.7, true, "c"}}, 2);
  bool ok = std::abs(ap - 5.0 / 6.0) <= 1e-15;

  PageEvalInput page;
  page.page_id = "p";
  TextBox l, v;
  l.id = "l";
  l.rect = {0, 0, 100, 30};
  l.cls = TextClass::PrePrinted;
  v.id = "v";
  v.rect = {150, 0, 250, 30};
  v.cls = TextClass::Input;
  page.gt_boxes = {l, v};
  page.pred_boxes = page.gt_boxes;
  page.gt_relationships = {{"l", "v"}};
  page.scored_pairs = {{"l", "v", 1.0}};
  const auto rep = evaluate_pages({page});
  // "Exactly" up to the double rounding of 5/6 itself.
  ok = ok && rep.rel_ap_pooled == 1.0 && rep.rel_f_measure == 1.0;
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "AP([TP,FP,TP], 2) = %.17g (5/6 exactly); perfect inputs give AP = F-m = 1",
                ap);
  report(4, ok, buf);
}

void criterion_5_candidate_recall() {
  const auto pages =
      generate_synthetic_pages({60, 4, 3, SynthSpec::Layout::Mixed, 6.0, 10, 20250101});
  const LosConfig los;
  long total_rels = 0, found = 0;
  std::size_t max_pairs = 0;
  for (const auto& page : pages) {
    const auto pairs = generate_candidates(page.boxes, los);
    max_pairs = std::max(max_pairs, pairs.size());
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& cp : pairs) keys.insert({cp.a_id, cp.b_id});
    for (const auto& rel : page.relationships) {
      ++total_rels;
      found += keys.count(rel) ? 1 : 0;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "candidate recall %ld/%ld on %zu pages, max %zu pairs/page (cap 370)", found,
                total_rels, pages.size(), max_pairs);
  report(5, found == total_rels && max_pairs <= 370, buf);
}

struct ScorerOutcome {
  double ap = 0;           // pooled relationship AP, unoptimized scores
  double f_raw = 0;        // F-measure at 0.5, unoptimized
  double f_optimized = 0;  // F-measure after optimization (c = 0.25, T = 0.5)
};

ScorerOutcome run_scorer(const std::vector<PageFile>& pages, PairsFile pairs,
                         const std::string& method, const SpatialClassifier* model,
                         const OptimizeParams& params) {
  score_stage(pairs, pages, method, model, false, 1);
  ScorerOutcome out;
  const auto rep = evaluate_pages(eval_inputs_from_pairs(pages, pairs));
  out.ap = rep.rel_ap_pooled;
  out.f_raw = rep.rel_f_measure;
  const auto decisions = optimize_stage(pairs, params, 1);
  const auto rep_opt = evaluate_pages(eval_inputs_from_decisions(pages, decisions));
  out.f_optimized = rep_opt.rel_f_measure;
  return out;
}

void criteria_6_and_7_scorer_ordering() {
  // 3x2 cell pages keep the exact solver certified within milliseconds even
  // in the c = 25 regime of criterion 7.
  const auto t0 = std::chrono::steady_clock::now();
  const auto train_pages =
      generate_synthetic_pages({40, 3, 2, SynthSpec::Layout::Mixed, 6.0, 12, 501});
  const auto held_out =
      generate_synthetic_pages({25, 3, 2, SynthSpec::Layout::Mixed, 6.0, 12, 777});

  const LosConfig los;
  const auto dataset = build_training_set(train_pages, los, 1);
  TrainConfig cfg;
  cfg.iterations = 1200;
  cfg.batch_size = 256;
  cfg.rng_seed = 99;
  const SpatialClassifier model = train_classifier(dataset, cfg);

  const PairsFile candidates = candidates_stage(held_out, los, 1);
  OptimizeParams params;  // c = 0.25; T = 0.5 when producing F-measure outputs
  params.T = 0.5;
  const auto mlp = run_scorer(held_out, candidates, "mlp", &model, params);
  const auto dist = run_scorer(held_out, candidates, "distance", nullptr, params);
  const auto heur = run_scorer(held_out, candidates, "heuristic", nullptr, params);

  char buf[220];
  std::snprintf(buf, sizeof(buf),
                "held-out AP: mlp %.3f > distance %.3f, adapted %.3f; distance F-m %.3f -> "
                "%.3f optimized (%.0f s)",
                mlp.ap, dist.ap, heur.ap, dist.f_raw, dist.f_optimized, seconds_since(t0));
  const bool pass6 = mlp.ap > dist.ap && mlp.ap > heur.ap &&
                     dist.f_optimized >= dist.f_raw && seconds_since(t0) < 600.0;
  report(6, pass6, buf);

  // Criterion 7: the upper-bound experiment. Noisy ground-truth neighbor
  // targets do at least as well as predicted targets for the same scorer at
  // the same trust level (c = 25 per the Table IV protocol; changing both the
  // target source and c at once conflates two variables and empirically
  // rewards the softer c whenever the scores carry signal).
  OptimizeParams pred25 = params;
  pred25.c = 25.0;
  OptimizeParams gt_noisy = params;
  gt_noisy.neighbor_mode = "gt-noisy";
  gt_noisy.c = 25.0;
  gt_noisy.seed = 4242;

  PairsFile scored = candidates;
  score_stage(scored, held_out, "mlp", &model, false, 1);
  const double f_pred25 = evaluate_pages(eval_inputs_from_decisions(
                                             held_out, optimize_stage(scored, pred25, 1)))
                              .rel_f_measure;
  const double f_gt = evaluate_pages(eval_inputs_from_decisions(
                                         held_out, optimize_stage(scored, gt_noisy, 1)))
                          .rel_f_measure;
  // Softer-trust reference point for the predicted mode, for context.
  const double f_pred_soft = evaluate_pages(eval_inputs_from_decisions(
                                                held_out, optimize_stage(scored, params, 1)))
                                 .rel_f_measure;
  char buf7[200];
  std::snprintf(buf7, sizeof(buf7),
                "mlp optimized F-m at c=25: gt-noisy %.3f >= predicted %.3f "
                "(predicted at c=0.25 for reference: %.3f)",
                f_gt, f_pred25, f_pred_soft);
  report(7, f_gt >= f_pred25, buf7);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void criterion_8_determinism() {
  const fs::path dir =
      fs::temp_directory_path() / ("formpair_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = FORMPAIR_CLI_PATH;
  const std::string pages = (dir / "pages.json").string();

  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str())) == 0;
  };
  bool ok = run("synth -o " + pages +
                " --pages 6 --rows 4 --cols 3 --layout mixed --jitter 5 --distractors 6 "
                "--seed 77");
  for (const std::string run_spec : {"a --jobs 1", "b --jobs 1", "c --jobs 4"}) {
    const std::string tag = run_spec.substr(0, 1);
    ok = ok && run("pipeline " + pages +
                   " --scorer distance --neighbor-mode gt-noisy --seed 5 -o " +
                   (dir / tag).string() + run_spec.substr(1));
  }
  const std::vector<std::string> files = {"scores.json", "decisions.json", "report.json",
                                          "report_scores.json"};
  bool identical = ok;
  for (const auto& name : files) {
    const std::string a = read_file(dir / "a" / name);
    identical = identical && !a.empty() && a == read_file(dir / "b" / name) &&
                a == read_file(dir / "c" / name);
  }
  fs::remove_all(dir);
  report(8, identical,
         "pipeline outputs byte-identical across repeated runs and worker-pool sizes");
}

void criterion_9_property_suite() {
  Rng rng(1009);
  int failures = 0;

  // IoU symmetry and bounds.
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(0, 500), y = rng.uniform(0, 500);
    const Rect a{x, y, x + rng.uniform(5, 100), y + rng.uniform(5, 100)};
    const double x2 = rng.uniform(0, 500), y2 = rng.uniform(0, 500);
    const Rect b{x2, y2, x2 + rng.uniform(5, 100), y2 + rng.uniform(5, 100)};
    const double v = iou(a, b);
    if (v != iou(b, a) || v < 0 || v > 1 || iou(a, a) != 1.0) ++failures;
  }

  // NMS idempotence and the suppression invariant.
  for (int i = 0; i < 1000; ++i) {
    std::vector<TextBox> boxes;
    const int n = 1 + static_cast<int>(rng.uniform_index(12));
    for (int k = 0; k < n; ++k) {
      TextBox b;
      b.id = "b" + std::to_string(k);
      const double x = rng.uniform(0, 60), y = rng.uniform(0, 60);
      b.rect = {x, y, x + rng.uniform(10, 50), y + rng.uniform(10, 50)};
      b.cls = rng.bernoulli(0.5) ? TextClass::Input : TextClass::PrePrinted;
      b.confidence = rng.uniform();
      boxes.push_back(b);
    }
    const double thr = rng.uniform(0.2, 0.9);
    const auto once = nms(boxes, 0.3, thr);
    const auto twice = nms(once, 0.3, thr);
    bool bad = once.size() != twice.size();
    for (std::size_t a = 0; a < once.size() && !bad; ++a) {
      bad = once[a].id != twice[a].id;
      for (std::size_t c = a + 1; c < once.size() && !bad; ++c) {
        if (once[a].cls == once[c].cls && iou(once[a].rect, once[c].rect) >= thr) bad = true;
      }
    }
    if (bad) ++failures;
  }

  // Anchor-clustering monotone objective.
  for (int i = 0; i < 1000; ++i) {
    const int groups = 2 + static_cast<int>(rng.uniform_index(3));
    std::vector<std::pair<double, double>> centers;
    for (int g = 0; g < groups; ++g) {
      centers.push_back({rng.uniform(40, 400), rng.uniform(12, 60)});
    }
    std::vector<std::pair<double, double>> shapes;
    const int n = 12 + static_cast<int>(rng.uniform_index(30));
    for (int k = 0; k < n; ++k) {
      const auto& c = centers[rng.uniform_index(centers.size())];
      shapes.push_back({std::max(2.0, c.first + rng.uniform(-15, 15)),
                        std::max(2.0, c.second + rng.uniform(-5, 5))});
    }
    const int k = 1 + static_cast<int>(rng.uniform_index(4));
    auto sorted = shapes;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      return a.first * a.second < b.first * b.second;
    });
    std::vector<std::pair<double, double>> seeds;
    for (int s = 0; s < k; ++s) {
      seeds.push_back(sorted[k == 1 ? 0 : s * (sorted.size() - 1) / (k - 1)]);
    }
    std::vector<double> trace;
    cluster_anchors(shapes, k, seeds, &trace);
    for (std::size_t t = 1; t < trace.size(); ++t) {
      if (trace[t] < trace[t - 1] - 1e-12) {
        ++failures;
        break;
      }
    }
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "IoU/NMS/anchor property suite: %d failures over 3x1000 randomized cases",
                failures);
  report(9, failures == 0, buf);
}

}  // namespace

int main() {
  criterion_1_optimizer_exactness();
  criterion_2_threshold_reduction();
  criterion_3_gradients();
  criterion_4_metric_oracle();
  criterion_5_candidate_recall();
  criteria_6_and_7_scorer_ordering();
  criterion_8_determinism();
  criterion_9_property_suite();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
