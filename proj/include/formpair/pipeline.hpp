#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "formpair/candidates.hpp"
#include "formpair/eval.hpp"
#include "formpair/io.hpp"
#include "formpair/mlp.hpp"
#include "formpair/optimizer.hpp"
#include "formpair/scoring.hpp"

namespace formpair {

// Batch-run configuration, settable from CLI flags or a JSON config file.
struct RunConfig {
  LosConfig los;
  std::string scorer = "distance";  // distance | heuristic | mlp
  std::string model_path;
  double c = 0.25;
  double T = 0.7;
  std::string neighbor_mode = "predicted";  // predicted | gt-noisy
  std::uint64_t seed = 0;
  long long node_budget = 10'000'000;
  double det_conf_threshold = 0.5;
  double rel_score_threshold = 0.5;
  double iou_threshold = 0.5;
  int jobs = 0;  // 0 = available parallelism
};

inline RunConfig run_config_from_json(const nlohmann::json& j, const std::string& file) {
  RunConfig cfg;
  if (j.contains("los")) {
    const auto& l = j["los"];
    cfg.los.points_per_edge = l.value("points_per_edge", cfg.los.points_per_edge);
    if (l.contains("fan_degrees")) {
      cfg.los.fan_degrees = l["fan_degrees"].get<std::vector<double>>();
    }
    cfg.los.max_ray_len = l.value("max_ray_len", cfg.los.max_ray_len);
    cfg.los.cap = l.value("cap", cfg.los.cap);
    cfg.los.shrink_factor = l.value("shrink_factor", cfg.los.shrink_factor);
    cfg.los.opposite_class_only = l.value("opposite_class_only", cfg.los.opposite_class_only);
    if (cfg.los.points_per_edge < 1 || cfg.los.cap < 1 || cfg.los.max_ray_len <= 0 ||
        cfg.los.shrink_factor <= 0 || cfg.los.shrink_factor >= 1) {
      throw SchemaError(file, "los", "line-of-sight parameters out of range");
    }
  }
  cfg.scorer = j.value("scorer", cfg.scorer);
  if (cfg.scorer != "distance" && cfg.scorer != "heuristic" && cfg.scorer != "mlp") {
    throw SchemaError(file, "scorer", "must be distance, heuristic, or mlp");
  }
  cfg.model_path = j.value("model", cfg.model_path);
  cfg.c = j.value("c", cfg.c);
  cfg.T = j.value("T", cfg.T);
  cfg.neighbor_mode = j.value("neighbor_mode", cfg.neighbor_mode);
  if (cfg.neighbor_mode != "predicted" && cfg.neighbor_mode != "gt-noisy") {
    throw SchemaError(file, "neighbor_mode", "must be predicted or gt-noisy");
  }
  cfg.seed = j.value("seed", cfg.seed);
  cfg.node_budget = j.value("node_budget", cfg.node_budget);
  cfg.rel_score_threshold = j.value("rel_score_threshold", cfg.rel_score_threshold);
  cfg.det_conf_threshold = j.value("det_conf_threshold", cfg.det_conf_threshold);
  cfg.iou_threshold = j.value("iou_threshold", cfg.iou_threshold);
  cfg.jobs = j.value("jobs", cfg.jobs);
  if (cfg.c < 0 || cfg.T < 0 || cfg.T > 1) {
    throw SchemaError(file, "$", "c must be >= 0 and T in [0, 1]");
  }
  return cfg;
}

// Runs fn(i) for i in [0, n) on a pool of worker threads. Work items are
// independent; output determinism comes from writing into index i slots.
template <typename Fn>
inline void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  if (n == 0) return;
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline std::vector<PageFile> sorted_by_page_id(std::vector<PageFile> pages) {
  std::sort(pages.begin(), pages.end(),
            [](const PageFile& a, const PageFile& b) { return a.page_id < b.page_id; });
  return pages;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

inline PairsPage candidates_for_page(const PageFile& page, const LosConfig& los) {
  PairsPage out;
  out.page_id = page.page_id;
  const bool have_gt = !page.relationships.empty();
  const auto counts = page.neighbor_counts();
  for (const auto& b : page.boxes) {
    PairsPage::BoxSummary s;
    s.id = b.id;
    s.cls = b.cls;
    s.nn_pred = b.nn_pred;
    if (have_gt) s.gt_neighbors = counts.at(b.id);
    out.boxes.push_back(std::move(s));
  }
  out.pairs = generate_candidates(page.boxes, los);
  return out;
}

inline PairsFile candidates_stage(const std::vector<PageFile>& pages, const LosConfig& los,
                                  int jobs = 0) {
  PairsFile out;
  out.pages.resize(pages.size());
  parallel_for(pages.size(), jobs,
               [&](std::size_t i) { out.pages[i] = candidates_for_page(pages[i], los); });
  return out;
}

// Fills pair scores in place. `model` is required for the mlp scorer; feature
// vectors are stored when `emit_features` is set.
inline void score_stage(PairsFile& pairs, const std::vector<PageFile>& pages,
                        const std::string& method, const SpatialClassifier* model = nullptr,
                        bool emit_features = false, int jobs = 0) {
  if (method != "distance" && method != "heuristic" && method != "mlp") {
    throw InvalidInputError("score_stage: unknown method '" + method + "'");
  }
  if (method == "mlp" && !model) {
    throw InvalidInputError("score_stage: mlp scorer requires a model");
  }
  std::map<std::string, const PageFile*> by_id;
  for (const auto& p : pages) by_id[p.page_id] = &p;

  parallel_for(pairs.pages.size(), jobs, [&](std::size_t pi) {
    PairsPage& page = pairs.pages[pi];
    const auto it = by_id.find(page.page_id);
    if (it == by_id.end()) {
      throw InvalidInputError("score_stage: pairs reference unknown page '" + page.page_id +
                              "'");
    }
    std::map<std::string, TextBox> boxes;
    for (const auto& b : it->second->boxes) boxes[b.id] = b;
    for (const auto& cp : page.pairs) {
      if (!boxes.count(cp.a_id) || !boxes.count(cp.b_id)) {
        throw InvalidInputError("score_stage: pair references unknown box on page '" +
                                page.page_id + "'");
      }
    }

    if (method == "distance") {
      const auto scores = score_distance(page.pairs, boxes);
      for (std::size_t i = 0; i < page.pairs.size(); ++i) page.pairs[i].score = scores[i];
    } else if (method == "heuristic") {
      const auto scores = score_heuristic(page.pairs, boxes);
      for (std::size_t i = 0; i < page.pairs.size(); ++i) {
        page.pairs[i].score = scores.normalized[i];
      }
    } else {
      std::vector<FeatureVector> features;
      features.reserve(page.pairs.size());
      for (const auto& cp : page.pairs) {
        const auto [a, b] = orient_pair(boxes.at(cp.a_id), boxes.at(cp.b_id));
        features.push_back(extract_features(*a, *b));
      }
      if (!features.empty()) {
        const auto probs = mlp_eval(*model, features);
        for (std::size_t i = 0; i < page.pairs.size(); ++i) {
          page.pairs[i].score = probs[i];
          if (emit_features) page.pairs[i].features = features[i];
        }
      }
    }
  });
  pairs.method = method;
}

struct OptimizeParams {
  double c = 0.25;
  double T = 0.7;
  std::string neighbor_mode = "predicted";
  std::uint64_t seed = 0;
  long long node_budget = 10'000'000;
};

inline DecisionsPage optimize_page(const PairsPage& page, const OptimizeParams& params) {
  PairingProblem prob;
  prob.c = params.c;
  prob.T = params.T;

  std::vector<TextBox> boxes;
  std::map<std::string, double> gt_counts;
  std::map<std::string, int> box_index;
  for (const auto& s : page.boxes) {
    TextBox b;
    b.id = s.id;
    b.cls = s.cls;
    b.rect = {0, 0, 1, 1};
    b.nn_pred = s.nn_pred;
    box_index[s.id] = static_cast<int>(boxes.size());
    boxes.push_back(std::move(b));
    if (s.gt_neighbors) gt_counts[s.id] = *s.gt_neighbors;
  }

  const NeighborMode mode = params.neighbor_mode == "gt-noisy"
                                ? NeighborMode::GroundTruthNoisy
                                : NeighborMode::Predicted;
  prob.n_target = apply_neighbor_mode(
      boxes, mode, mode == NeighborMode::GroundTruthNoisy ? &gt_counts : nullptr,
      hash_seed(params.seed, page.page_id));

  for (const auto& cp : page.pairs) {
    if (!cp.score) {
      throw InvalidInputError("optimize: page '" + page.page_id +
                              "' has unscored pairs; run the score stage first");
    }
    prob.p.push_back(*cp.score);
    prob.touches.emplace_back(box_index.at(cp.a_id), box_index.at(cp.b_id));
  }

  const PairingDecision dec = solve_bnb(prob, params.node_budget);

  DecisionsPage out;
  out.page_id = page.page_id;
  out.objective = dec.objective;
  out.nodes_explored = dec.nodes_explored;
  out.certified = dec.certified;
  for (std::size_t r = 0; r < page.pairs.size(); ++r) {
    DecisionsPage::Entry e;
    e.a_id = page.pairs[r].a_id;
    e.b_id = page.pairs[r].b_id;
    e.p = prob.p[r];
    e.accepted = dec.x[r] != 0;
    e.adjusted_score = dec.adjusted_scores[r];
    out.pairs.push_back(std::move(e));
  }
  return out;
}

inline DecisionsFile optimize_stage(const PairsFile& pairs, const OptimizeParams& params,
                                    int jobs = 0) {
  DecisionsFile out;
  out.c = params.c;
  out.T = params.T;
  out.neighbor_mode = params.neighbor_mode;
  out.seed = params.seed;
  out.node_budget = params.node_budget;
  out.pages.resize(pairs.pages.size());
  parallel_for(pairs.pages.size(), jobs,
               [&](std::size_t i) { out.pages[i] = optimize_page(pairs.pages[i], params); });
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation adapters
// ---------------------------------------------------------------------------

// Builds eval inputs from scored pairs. `gt_pages` defaults to the prediction
// pages themselves (the ground-truth-boxes setting).
inline std::vector<PageEvalInput> eval_inputs_from_pairs(
    const std::vector<PageFile>& pages, const PairsFile& pairs,
    const std::vector<PageFile>* gt_pages = nullptr) {
  std::map<std::string, const PageFile*> gt_by_id;
  for (const auto& p : gt_pages ? *gt_pages : pages) gt_by_id[p.page_id] = &p;
  std::map<std::string, const PairsPage*> pairs_by_id;
  for (const auto& p : pairs.pages) pairs_by_id[p.page_id] = &p;

  std::vector<PageEvalInput> inputs;
  for (const auto& page : pages) {
    const auto git = gt_by_id.find(page.page_id);
    if (git == gt_by_id.end()) {
      throw InvalidInputError("evaluate: no ground truth for page '" + page.page_id + "'");
    }
    PageEvalInput in;
    in.page_id = page.page_id;
    in.pred_boxes = page.boxes;
    in.gt_boxes = git->second->boxes;
    in.gt_relationships = git->second->relationship_set();
    const auto pit = pairs_by_id.find(page.page_id);
    if (pit != pairs_by_id.end()) {
      for (const auto& cp : pit->second->pairs) {
        if (!cp.score) {
          throw InvalidInputError("evaluate: page '" + page.page_id +
                                  "' has unscored pairs; run the score stage first");
        }
        in.scored_pairs.push_back({cp.a_id, cp.b_id, *cp.score});
      }
    }
    inputs.push_back(std::move(in));
  }
  return inputs;
}

inline std::vector<PageEvalInput> eval_inputs_from_decisions(
    const std::vector<PageFile>& pages, const DecisionsFile& decisions,
    const std::vector<PageFile>* gt_pages = nullptr) {
  std::map<std::string, const PageFile*> gt_by_id;
  for (const auto& p : gt_pages ? *gt_pages : pages) gt_by_id[p.page_id] = &p;
  std::map<std::string, const DecisionsPage*> dec_by_id;
  for (const auto& p : decisions.pages) dec_by_id[p.page_id] = &p;

  std::vector<PageEvalInput> inputs;
  for (const auto& page : pages) {
    const auto git = gt_by_id.find(page.page_id);
    if (git == gt_by_id.end()) {
      throw InvalidInputError("evaluate: no ground truth for page '" + page.page_id + "'");
    }
    PageEvalInput in;
    in.page_id = page.page_id;
    in.pred_boxes = page.boxes;
    in.gt_boxes = git->second->boxes;
    in.gt_relationships = git->second->relationship_set();
    const auto dit = dec_by_id.find(page.page_id);
    if (dit != dec_by_id.end()) {
      // Adjusted scores rank every candidate for AP; the accepted set is the
      // prediction set for precision/recall (the optimizer's T did the
      // thresholding).
      in.predicted_pairs.emplace();
      for (const auto& e : dit->second->pairs) {
        in.scored_pairs.push_back({e.a_id, e.b_id, e.adjusted_score});
        if (e.accepted) in.predicted_pairs->push_back({e.a_id, e.b_id, e.p});
      }
    }
    inputs.push_back(std::move(in));
  }
  return inputs;
}

// ---------------------------------------------------------------------------
// Training-set construction (ground-truth boxes)
// ---------------------------------------------------------------------------

inline std::vector<LabeledExample> build_training_set(const std::vector<PageFile>& pages,
                                                      const LosConfig& los, int jobs = 0) {
  std::vector<std::vector<LabeledExample>> per_page(pages.size());
  parallel_for(pages.size(), jobs, [&](std::size_t pi) {
    const PageFile& page = pages[pi];
    std::map<std::string, TextBox> boxes;
    for (const auto& b : page.boxes) boxes[b.id] = b;
    const RelationshipSet gt = page.relationship_set();
    for (const auto& cp : generate_candidates(page.boxes, los)) {
      const auto [a, b] = orient_pair(boxes.at(cp.a_id), boxes.at(cp.b_id));
      LabeledExample ex;
      ex.features = extract_features(*a, *b);
      ex.label = gt.count(normalize_rel(cp.a_id, cp.b_id)) ? 1.0 : 0.0;
      per_page[pi].push_back(std::move(ex));
    }
  });
  std::vector<LabeledExample> out;
  for (auto& v : per_page) {
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full pipeline: candidates -> score -> optimize -> evaluate
// ---------------------------------------------------------------------------

struct PipelineResult {
  PairsFile scores;
  DecisionsFile decisions;
  EvalReport report_scores;     // before optimization
  EvalReport report_decisions;  // after optimization
};

inline PipelineResult run_pipeline(const std::vector<PageFile>& input_pages,
                                   const RunConfig& cfg) {
  const std::vector<PageFile> pages = sorted_by_page_id(input_pages);

  SpatialClassifier model;
  const SpatialClassifier* model_ptr = nullptr;
  if (cfg.scorer == "mlp") {
    if (cfg.model_path.empty()) {
      throw InvalidInputError("pipeline: mlp scorer requires a model path");
    }
    model = load_model(cfg.model_path);
    model_ptr = &model;
  }

  PipelineResult result;
  result.scores = candidates_stage(pages, cfg.los, cfg.jobs);
  score_stage(result.scores, pages, cfg.scorer, model_ptr, false, cfg.jobs);

  OptimizeParams params;
  params.c = cfg.c;
  params.T = cfg.T;
  params.neighbor_mode = cfg.neighbor_mode;
  params.seed = cfg.seed;
  params.node_budget = cfg.node_budget;
  result.decisions = optimize_stage(result.scores, params, cfg.jobs);

  result.report_scores =
      evaluate_pages(eval_inputs_from_pairs(pages, result.scores), cfg.det_conf_threshold,
                     cfg.rel_score_threshold, cfg.iou_threshold);
  result.report_decisions =
      evaluate_pages(eval_inputs_from_decisions(pages, result.decisions),
                     cfg.det_conf_threshold, cfg.rel_score_threshold, cfg.iou_threshold);
  return result;
}

inline void write_pipeline_outputs(const std::string& out_dir, const PipelineResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  save_pairs((fs::path(out_dir) / "scores.json").string(), result.scores);
  save_decisions((fs::path(out_dir) / "decisions.json").string(), result.decisions);
  save_report((fs::path(out_dir) / "report_scores.json").string(), result.report_scores);
  save_report((fs::path(out_dir) / "report.json").string(), result.report_decisions);
}

}  // namespace formpair
