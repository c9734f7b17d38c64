// formpair: batch tool for pairing pre-printed labels with input text on form
// pages. Subcommands cover the full pipeline (candidate generation, scoring,
// global optimization, evaluation) plus synthetic data, overlays, and anchor
// clustering.
//
// Exit codes: 0 success, 2 usage error, 3 data/schema error, 4 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "formpair/io.hpp"
#include "formpair/pipeline.hpp"
#include "formpair/svg.hpp"
#include "formpair/synth.hpp"

namespace fs = std::filesystem;
using namespace formpair;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

void add_los_flags(CLI::App* cmd, LosConfig& los) {
  cmd->add_option("--points-per-edge", los.points_per_edge, "Ray origins per box edge")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--fan-degrees", los.fan_degrees,
                  "Ray angles about the outward edge normal (degrees)")
      ->delimiter(',');
  cmd->add_option("--max-ray-len", los.max_ray_len, "Maximum ray length in pixels")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cap", los.cap, "Maximum number of candidate pairs per page")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--shrink-factor", los.shrink_factor,
                  "Ray length multiplier applied when the cap is exceeded")
      ->check(CLI::Range(0.01, 0.99));
  cmd->add_flag_callback(
      "--all-classes", [&los]() { los.opposite_class_only = false; },
      "Keep same-class candidate pairs");
}

std::vector<PageFile> load_pages_sorted(const std::string& path) {
  return sorted_by_page_id(load_pages(path));
}

int run(int argc, char** argv) {
  CLI::App app{"Label/value pairing pipeline for form pages"};
  app.require_subcommand(1);

  // --- candidates -----------------------------------------------------------
  auto* cmd_candidates =
      app.add_subcommand("candidates", "Generate line-of-sight candidate pairs");
  struct {
    std::string pages, out;
    LosConfig los;
    int jobs = 0;
  } cand;
  cmd_candidates->add_option("pages", cand.pages, "Pages JSON file")->required();
  cmd_candidates->add_option("-o,--output", cand.out, "Output pairs file")->required();
  cmd_candidates->add_option("--jobs", cand.jobs, "Worker threads (0 = auto)");
  add_los_flags(cmd_candidates, cand.los);
  cmd_candidates->callback([&]() {
    const auto pages = load_pages_sorted(cand.pages);
    save_pairs(cand.out, candidates_stage(pages, cand.los, cand.jobs));
  });

  // --- score ----------------------------------------------------------------
  auto* cmd_score = app.add_subcommand("score", "Score candidate pairs");
  struct {
    std::string pages, pairs, out, method = "distance", model;
    bool emit_features = false;
    int jobs = 0;
  } sc;
  cmd_score->add_option("pages", sc.pages, "Pages JSON file")->required();
  cmd_score->add_option("pairs", sc.pairs, "Candidate pairs file")->required();
  cmd_score->add_option("--method", sc.method, "Scorer: distance, heuristic, or mlp")
      ->required()
      ->check(CLI::IsMember({"distance", "heuristic", "mlp"}));
  cmd_score->add_option("--model", sc.model, "Model file (mlp scorer)");
  cmd_score->add_flag("--emit-features", sc.emit_features,
                      "Store feature vectors in the output");
  cmd_score->add_option("--jobs", sc.jobs, "Worker threads (0 = auto)");
  cmd_score->add_option("-o,--output", sc.out, "Output scores file")->required();
  cmd_score->callback([&]() {
    const auto pages = load_pages_sorted(sc.pages);
    PairsFile pairs = load_pairs(sc.pairs);
    SpatialClassifier model;
    const SpatialClassifier* model_ptr = nullptr;
    if (sc.method == "mlp") {
      if (sc.model.empty()) {
        throw CLI::ValidationError("--method mlp requires --model");
      }
      model = load_model(sc.model);
      model_ptr = &model;
    }
    score_stage(pairs, pages, sc.method, model_ptr, sc.emit_features, sc.jobs);
    save_pairs(sc.out, pairs);
  });

  // --- train ------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "Train the spatial MLP scorer");
  struct {
    std::vector<std::string> pages;
    std::string out;
    bool gt_boxes = false;
    TrainConfig cfg;
    int hidden = 256;
    LosConfig los;
  } tr;
  cmd_train->add_option("pages", tr.pages, "Pages JSON files with GT relationships")
      ->required();
  cmd_train->add_flag("--gt-boxes", tr.gt_boxes,
                      "Boxes are ground truth; labels come from GT relationships");
  cmd_train->add_option("--learning-rate", tr.cfg.learning_rate, "Adam learning rate")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--batch-size", tr.cfg.batch_size, "Batch size")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("--iterations", tr.cfg.iterations, "Training iterations")
      ->check(CLI::NonNegativeNumber);
  cmd_train->add_option("--seed", tr.cfg.rng_seed, "RNG seed");
  cmd_train->add_option("--hidden", tr.hidden, "Hidden layer width")
      ->check(CLI::PositiveNumber);
  cmd_train->add_option("-o,--output", tr.out, "Output model file")->required();
  add_los_flags(cmd_train, tr.los);
  cmd_train->callback([&]() {
    if (!tr.gt_boxes) {
      throw CLI::ValidationError(
          "train currently supports --gt-boxes only (labels from GT relationships)");
    }
    std::vector<LabeledExample> dataset;
    for (const auto& path : tr.pages) {
      const auto pages = load_pages_sorted(path);
      auto part = build_training_set(pages, tr.los);
      dataset.insert(dataset.end(), part.begin(), part.end());
    }
    const SpatialClassifier model = train_classifier(dataset, tr.cfg, tr.hidden);
    save_model(tr.out, model);
    std::cout << "trained on " << dataset.size() << " pairs, final loss "
              << model.metadata.final_loss << "\n";
  });

  // --- optimize ---------------------------------------------------------
  auto* cmd_optimize = app.add_subcommand("optimize", "Globally optimize pairing decisions");
  struct {
    std::string scores, out;
    OptimizeParams params;
    int jobs = 0;
  } opt;
  cmd_optimize->add_option("scores", opt.scores, "Scored pairs file")->required();
  cmd_optimize->add_option("--c", opt.params.c, "Neighbor-count confidence weight")
      ->check(CLI::NonNegativeNumber);
  cmd_optimize->add_option("--T", opt.params.T, "Soft acceptance threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd_optimize
      ->add_option("--neighbor-mode", opt.params.neighbor_mode,
                   "Neighbor target source: predicted or gt-noisy")
      ->check(CLI::IsMember({"predicted", "gt-noisy"}));
  cmd_optimize->add_option("--seed", opt.params.seed, "Seed for gt-noisy mode");
  cmd_optimize->add_option("--node-budget", opt.params.node_budget,
                           "Branch-and-bound node budget");
  cmd_optimize->add_option("--jobs", opt.jobs, "Worker threads (0 = auto)");
  cmd_optimize->add_option("-o,--output", opt.out, "Output decisions file")->required();
  cmd_optimize->callback([&]() {
    const PairsFile pairs = load_pairs(opt.scores);
    save_decisions(opt.out, optimize_stage(pairs, opt.params, opt.jobs));
  });

  // --- evaluate -----------------------------------------------------------
  auto* cmd_evaluate =
      app.add_subcommand("evaluate", "Compute detection and relationship metrics");
  struct {
    std::string pages, input, out, gt;
    double rel_threshold = 0.5, det_threshold = 0.5, iou = 0.5;
  } ev;
  cmd_evaluate->add_option("pages", ev.pages, "Pages JSON file (predictions)")->required();
  cmd_evaluate->add_option("input", ev.input, "Scores or decisions file")->required();
  cmd_evaluate->add_option("--gt", ev.gt,
                           "Ground-truth pages file (defaults to the pages file)");
  cmd_evaluate->add_option("--rel-threshold", ev.rel_threshold,
                           "Relationship score threshold for P/R/F");
  cmd_evaluate->add_option("--det-threshold", ev.det_threshold,
                           "Detection confidence threshold for P/R/F");
  cmd_evaluate->add_option("--iou", ev.iou, "Detection match IoU threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd_evaluate->add_option("-o,--output", ev.out, "Output report file");
  cmd_evaluate->callback([&]() {
    const auto pages = load_pages_sorted(ev.pages);
    std::vector<PageFile> gt_pages;
    const std::vector<PageFile>* gt_ptr = nullptr;
    if (!ev.gt.empty()) {
      gt_pages = load_pages_sorted(ev.gt);
      gt_ptr = &gt_pages;
    }

    // A decisions file carries a params object; a scores file does not.
    const auto peek = detail::parse_file(ev.input);
    std::vector<PageEvalInput> inputs;
    if (peek.contains("params")) {
      inputs = eval_inputs_from_decisions(pages, load_decisions(ev.input), gt_ptr);
    } else {
      inputs = eval_inputs_from_pairs(pages, load_pairs(ev.input), gt_ptr);
    }
    const EvalReport rep =
        evaluate_pages(inputs, ev.det_threshold, ev.rel_threshold, ev.iou);
    if (!ev.out.empty()) save_report(ev.out, rep);
    std::cout << report_table(rep);
  });

  // --- pipeline ---------------------------------------------------------
  auto* cmd_pipeline =
      app.add_subcommand("pipeline", "candidates -> score -> optimize -> evaluate");
  struct {
    std::string pages, config, out_dir;
    std::string scorer, model, neighbor_mode;
    double c = -1, T = -1;
    std::int64_t seed = -1;
    int jobs = -1;
  } pl;
  cmd_pipeline->add_option("pages", pl.pages, "Pages JSON file")->required();
  cmd_pipeline->add_option("--config", pl.config,
                           "Run config JSON (default: $FORMPAIR_CONFIG if set)");
  cmd_pipeline->add_option("--scorer", pl.scorer, "Override scorer")
      ->check(CLI::IsMember({"distance", "heuristic", "mlp"}));
  cmd_pipeline->add_option("--model", pl.model, "Override model path");
  cmd_pipeline->add_option("--c", pl.c, "Override c");
  cmd_pipeline->add_option("--T", pl.T, "Override T");
  cmd_pipeline->add_option("--neighbor-mode", pl.neighbor_mode, "Override neighbor mode")
      ->check(CLI::IsMember({"predicted", "gt-noisy"}));
  cmd_pipeline->add_option("--seed", pl.seed, "Override seed");
  cmd_pipeline->add_option("--jobs", pl.jobs, "Worker threads (0 = auto)");
  cmd_pipeline->add_option("-o,--output", pl.out_dir, "Output directory")->required();
  cmd_pipeline->callback([&]() {
    RunConfig cfg;
    std::string config_path = pl.config;
    if (config_path.empty()) {
      if (const char* env = std::getenv("FORMPAIR_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) {
      cfg = run_config_from_json(detail::parse_file(config_path), config_path);
    }
    if (!pl.scorer.empty()) cfg.scorer = pl.scorer;
    if (!pl.model.empty()) cfg.model_path = pl.model;
    if (pl.c >= 0) cfg.c = pl.c;
    if (pl.T >= 0) cfg.T = pl.T;
    if (!pl.neighbor_mode.empty()) cfg.neighbor_mode = pl.neighbor_mode;
    if (pl.seed >= 0) cfg.seed = static_cast<std::uint64_t>(pl.seed);
    if (pl.jobs >= 0) cfg.jobs = pl.jobs;

    const auto pages = load_pages_sorted(pl.pages);
    const PipelineResult result = run_pipeline(pages, cfg);
    write_pipeline_outputs(pl.out_dir, result);
    std::cout << "== scores (" << cfg.scorer << ") ==\n"
              << report_table(result.report_scores) << "== decisions (c=" << cfg.c
              << ", T=" << cfg.T << ", " << cfg.neighbor_mode << ") ==\n"
              << report_table(result.report_decisions);
  });

  // --- synth ------------------------------------------------------------
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic form corpus");
  struct {
    std::string out, layout = "mixed";
    SynthSpec spec;
  } sy;
  cmd_synth->add_option("--pages", sy.spec.n_pages, "Number of pages")
      ->check(CLI::PositiveNumber);
  cmd_synth->add_option("--rows", sy.spec.rows, "Cell rows per page")
      ->check(CLI::PositiveNumber);
  cmd_synth->add_option("--cols", sy.spec.cols, "Cell columns per page")
      ->check(CLI::PositiveNumber);
  cmd_synth->add_option("--layout", sy.layout, "label-left, label-above, or mixed")
      ->check(CLI::IsMember({"label-left", "label-above", "mixed"}));
  cmd_synth->add_option("--jitter", sy.spec.jitter, "Uniform +-jitter in pixels")
      ->check(CLI::NonNegativeNumber);
  cmd_synth->add_option("--distractors", sy.spec.distractors,
                        "Unrelated boxes per page")
      ->check(CLI::NonNegativeNumber);
  cmd_synth->add_option("--seed", sy.spec.seed, "RNG seed");
  cmd_synth->add_option("-o,--output", sy.out, "Output pages file")->required();
  cmd_synth->callback([&]() {
    sy.spec.layout = parse_layout(sy.layout);
    save_pages(sy.out, generate_synthetic_pages(sy.spec));
  });

  // --- overlay ------------------------------------------------------------
  auto* cmd_overlay = app.add_subcommand("overlay", "Render SVG overlays for decisions");
  struct {
    std::string pages, decisions, out_dir;
    double threshold = 0.5;
  } ov;
  cmd_overlay->add_option("pages", ov.pages, "Pages JSON file")->required();
  cmd_overlay->add_option("decisions", ov.decisions, "Decisions file")->required();
  cmd_overlay->add_option("--threshold", ov.threshold,
                          "Score threshold for pruned-candidate lines");
  cmd_overlay->add_option("-o,--output", ov.out_dir, "Output directory")->required();
  cmd_overlay->callback([&]() {
    const auto pages = load_pages_sorted(ov.pages);
    const DecisionsFile decisions = load_decisions(ov.decisions);
    std::map<std::string, const DecisionsPage*> by_id;
    for (const auto& d : decisions.pages) by_id[d.page_id] = &d;
    fs::create_directories(ov.out_dir);
    for (const auto& page : pages) {
      const auto it = by_id.find(page.page_id);
      const DecisionsPage empty{page.page_id, 0, 0, true, {}};
      const auto lines =
          overlay_lines(page, it != by_id.end() ? *it->second : empty, ov.threshold);
      std::ofstream out(fs::path(ov.out_dir) / (page.page_id + ".svg"));
      out << render_overlay(page, lines);
    }
  });

  // --- anchors ------------------------------------------------------------
  auto* cmd_anchors = app.add_subcommand("anchors", "Cluster anchor shapes from box sizes");
  struct {
    std::string pages, out, seeds;
    int k = 25;
  } an;
  cmd_anchors->add_option("pages", an.pages, "Pages JSON file")->required();
  cmd_anchors->add_option("-k,--clusters", an.k, "Number of anchors")
      ->check(CLI::PositiveNumber);
  cmd_anchors->add_option("--seeds", an.seeds,
                          "Seeds JSON file {\"seeds\": [[w, h], ...]} (default: size "
                          "quantiles over the data)");
  cmd_anchors->add_option("-o,--output", an.out, "Output anchors file")->required();
  cmd_anchors->callback([&]() {
    const auto pages = load_pages_sorted(an.pages);
    std::vector<std::pair<double, double>> shapes;
    for (const auto& page : pages) {
      for (const auto& b : page.boxes) {
        shapes.emplace_back(b.rect.width(), b.rect.height());
      }
    }
    std::vector<std::pair<double, double>> seeds;
    if (!an.seeds.empty()) {
      const auto j = detail::parse_file(an.seeds);
      for (const auto& s : detail::field(j, "seeds", an.seeds, "$")) {
        seeds.emplace_back(s[0].get<double>(), s[1].get<double>());
      }
    } else {
      // Spread seeds across the size distribution: area quantiles.
      auto sorted = shapes;
      std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return std::make_tuple(a.first * a.second, a.first, a.second) <
               std::make_tuple(b.first * b.second, b.first, b.second);
      });
      if (static_cast<int>(sorted.size()) < an.k) {
        throw InvalidInputError("anchors: fewer boxes than clusters");
      }
      for (int i = 0; i < an.k; ++i) {
        const std::size_t idx =
            an.k == 1 ? 0 : i * (sorted.size() - 1) / (an.k - 1);
        seeds.push_back(sorted[idx]);
      }
    }
    const AnchorSet anchors = cluster_anchors(shapes, an.k, seeds);
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["k"] = anchors.k;
    j["anchors"] = nlohmann::json::array();
    for (const auto& [w, h] : anchors.anchors) {
      j["anchors"].push_back({w, h});
    }
    detail::write_file(an.out, j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const VersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
