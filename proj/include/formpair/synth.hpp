#pragma once

#include <string>
#include <vector>

#include "formpair/io.hpp"
#include "formpair/rng.hpp"

namespace formpair {

// Synthetic form corpus: a grid of label/value cells with optional jitter,
// many-to-one cells (one label, two values), and unrelated distractor boxes
// in a strip below the grid. Construction keeps every ground-truth pair
// mutually within line of sight at the default ray length.
struct SynthSpec {
  int n_pages = 10;
  int rows = 4;
  int cols = 3;
  enum class Layout { LabelLeft, LabelAbove, Mixed } layout = Layout::Mixed;
  double jitter = 0;  // uniform +-jitter pixel offsets; keep below ~8
  int distractors = 0;
  std::uint64_t seed = 0;
};

inline SynthSpec::Layout parse_layout(const std::string& s) {
  if (s == "label-left") return SynthSpec::Layout::LabelLeft;
  if (s == "label-above") return SynthSpec::Layout::LabelAbove;
  if (s == "mixed") return SynthSpec::Layout::Mixed;
  throw InvalidInputError("unknown layout '" + s + "'");
}

inline std::vector<PageFile> generate_synthetic_pages(const SynthSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) {
    throw InvalidInputError("generate_synthetic_pages: rows and cols must be >= 1");
  }
  constexpr double kMargin = 60, kColPitch = 460, kRowPitch = 120;
  constexpr double kLabelW = 150, kValueW = 120, kBoxH = 28;
  constexpr double kGap = 30, kStackGap = 12;

  std::vector<PageFile> pages;
  for (int pi = 0; pi < spec.n_pages; ++pi) {
    PageFile page;
    {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "p%04d", pi);
      page.page_id = buf;
    }
    Rng rng(hash_seed(spec.seed, page.page_id));
    const int distractor_rows = spec.distractors > 0 ? (spec.distractors - 1) / 8 + 1 : 0;
    page.width = 2 * kMargin + spec.cols * kColPitch;
    page.height = 2 * kMargin + spec.rows * kRowPitch + distractor_rows * 60 +
                  (distractor_rows > 0 ? 40 : 0);

    int next_id = 0;
    const auto make_id = [&]() {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "b%03d", next_id++);
      return std::string(buf);
    };
    const auto offset = [&]() {
      return spec.jitter > 0 ? rng.uniform(-spec.jitter, spec.jitter) : 0.0;
    };
    const auto add_box = [&](double x, double y, double w, double h, TextClass cls) {
      TextBox b;
      b.id = make_id();
      b.page_id = page.page_id;
      b.rect = {x, y, x + w, y + h};
      b.cls = cls;
      b.confidence = 1.0;
      b.p_preprinted = cls == TextClass::PrePrinted ? 1.0 : 0.0;
      b.p_input = 1.0 - b.p_preprinted;
      page.boxes.push_back(b);
      return b.id;
    };

    struct CellInfo {
      bool label_left = true;
      bool has_second_value = false;
    };
    std::vector<CellInfo> cells(static_cast<std::size_t>(spec.rows) * spec.cols);
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        const double x0 = kMargin + c * kColPitch + offset();
        const double y0 = kMargin + r * kRowPitch + offset();

        bool label_left = spec.layout == SynthSpec::Layout::LabelLeft;
        if (spec.layout == SynthSpec::Layout::Mixed) label_left = rng.bernoulli(0.5);
        const bool second_value = rng.bernoulli(0.25);
        cells[static_cast<std::size_t>(r) * spec.cols + c] = {label_left, second_value};

        const std::string label = add_box(x0, y0, kLabelW, kBoxH, TextClass::PrePrinted);
        std::string v1, v2;
        if (label_left) {
          const double vx = x0 + kLabelW + kGap;
          v1 = add_box(vx + offset(), y0 + offset(), kValueW, kBoxH, TextClass::Input);
          if (second_value) {
            v2 = add_box(vx + offset(), y0 + kBoxH + kStackGap + offset(), kValueW, kBoxH,
                         TextClass::Input);
          }
        } else {
          const double vy = y0 + kBoxH + kStackGap;
          v1 = add_box(x0 + offset(), vy + offset(), kValueW, kBoxH, TextClass::Input);
          if (second_value) {
            v2 = add_box(x0 + kLabelW + offset(), vy + offset(), kValueW, kBoxH,
                         TextClass::Input);
          }
        }
        page.relationships.push_back(normalize_rel(label, v1));
        if (!v2.empty()) page.relationships.push_back(normalize_rel(label, v2));
      }
    }

    // Distractors: unrelated boxes of random class woven into the layout but
    // off every ground-truth sight line (all GT lines are intra-cell). The
    // in-cell placements sit closer to a value than its own label does, which
    // is what defeats purely distance-based scoring on real forms; the rest
    // fill a strip below the grid.
    const double strip_y = kMargin + spec.rows * kRowPitch + 40;
    for (int d = 0; d < spec.distractors; ++d) {
      const TextClass cls =
          rng.bernoulli(0.5) ? TextClass::Input : TextClass::PrePrinted;
      const int cell = static_cast<int>(
          rng.uniform_index(static_cast<std::uint64_t>(spec.rows) * spec.cols));
      const double cx0 = kMargin + (cell % spec.cols) * kColPitch;
      const double cy0 = kMargin + (cell / spec.cols) * kRowPitch;
      const CellInfo& info = cells[cell];
      switch (d % 4) {
        case 0:  // empty second-value slot, 40px under the first value
          if (info.label_left && !info.has_second_value) {
            add_box(cx0 + kLabelW + kGap + offset(),
                    cy0 + kBoxH + kStackGap + offset(), kValueW, kBoxH, cls);
          } else {
            add_box(cx0 + 335 + offset(), cy0 + 36 + offset(), 90, 24, cls);
          }
          break;
        case 1:  // below the label; only label-left cells leave that spot open
          if (info.label_left) {
            add_box(cx0 + 10 + offset(), cy0 + kBoxH + kStackGap + 4 + offset(), 110, 24,
                    cls);
          } else {
            add_box(cx0 + 335 + offset(), cy0 + 70 + offset(), 90, 24, cls);
          }
          break;
        case 2:  // right margin of the cell
          add_box(cx0 + 335 + offset(), cy0 + offset(), 90, 24, cls);
          break;
        default: {  // strip below the grid
          const double x = kMargin + ((d / 4) % 8) * 180 + offset();
          add_box(x, strip_y + (d / 32) * 60 + offset(), 100, 24, cls);
          break;
        }
      }
    }

    // nn_pred mimics an imperfect detector regression: continuous, pulled
    // toward the page mean, with enough noise that the rounded value matches
    // the true count only about half the time.
    const auto counts = page.neighbor_counts();
    double mean_count = 0;
    for (const auto& [id, count] : counts) mean_count += count;
    mean_count /= static_cast<double>(counts.size());
    for (auto& b : page.boxes) {
      const double gt = counts.at(b.id);
      const double nn = 0.7 * gt + 0.3 * mean_count + rng.uniform(-1.25, 1.25);
      b.nn_pred = std::max(0.0, nn);
    }

    std::sort(page.relationships.begin(), page.relationships.end());
    pages.push_back(std::move(page));
  }
  return pages;
}

}  // namespace formpair
