#pragma once

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "formpair/io.hpp"

namespace formpair {

enum class LineKind {
  TruePositive,     // green
  FalsePositive,    // red
  FalseNegative,    // orange
  PrunedCorrect,    // thin yellow: rejected by the optimizer, not a GT pair
  PrunedIncorrect,  // thin pink: rejected by the optimizer, was a GT pair
};

struct OverlayLine {
  std::string a_id, b_id;
  LineKind kind = LineKind::TruePositive;
};

// Classifies a page's decisions against its ground-truth relationships into
// overlay lines. Candidates scoring below `score_threshold` that were
// rejected are true negatives and not drawn.
inline std::vector<OverlayLine> overlay_lines(const PageFile& page, const DecisionsPage& dec,
                                              double score_threshold = 0.5) {
  const RelationshipSet gt = page.relationship_set();
  std::vector<OverlayLine> lines;
  RelationshipSet covered;
  for (const auto& e : dec.pairs) {
    const auto key = normalize_rel(e.a_id, e.b_id);
    const bool is_gt = gt.count(key) > 0;
    if (e.accepted) {
      lines.push_back({key.first, key.second,
                       is_gt ? LineKind::TruePositive : LineKind::FalsePositive});
      covered.insert(key);
    } else if (is_gt) {
      lines.push_back({key.first, key.second, LineKind::PrunedIncorrect});
      covered.insert(key);
    } else if (e.p >= score_threshold) {
      lines.push_back({key.first, key.second, LineKind::PrunedCorrect});
    }
  }
  for (const auto& rel : gt) {
    if (!covered.count(rel)) {
      lines.push_back({rel.first, rel.second, LineKind::FalseNegative});
    }
  }
  return lines;
}

// Renders boxes and relationship lines as an SVG 1.1 document. Boxes are blue
// (pre-printed) or cyan (input); line colors follow LineKind. Element order
// is deterministic: optional background, boxes in page order, lines in the
// given order.
inline std::string render_overlay(const PageFile& page, const std::vector<OverlayLine>& lines,
                                  const std::string& background_href = "") {
  std::map<std::string, const TextBox*> by_id;
  for (const auto& b : page.boxes) by_id[b.id] = &b;
  for (const auto& line : lines) {
    if (!by_id.count(line.a_id) || !by_id.count(line.b_id)) {
      throw InvalidInputError("render_overlay: line references unknown box id");
    }
  }

  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << num(page.width) << "\" height=\"" << num(page.height) << "\">\n";
  if (!background_href.empty()) {
    svg << "  <image href=\"" << background_href << "\" x=\"0\" y=\"0\" width=\""
        << num(page.width) << "\" height=\"" << num(page.height) << "\"/>\n";
  }
  for (const auto& b : page.boxes) {
    svg << "  <rect x=\"" << num(b.rect.x_min) << "\" y=\"" << num(b.rect.y_min)
        << "\" width=\"" << num(b.rect.width()) << "\" height=\"" << num(b.rect.height())
        << "\" fill=\"none\" stroke=\""
        << (b.cls == TextClass::PrePrinted ? "blue" : "cyan")
        << "\" stroke-width=\"1.5\"><title>" << b.id << "</title></rect>\n";
  }
  for (const auto& line : lines) {
    const Rect& a = by_id.at(line.a_id)->rect;
    const Rect& b = by_id.at(line.b_id)->rect;
    const char* color = "green";
    double width = 2.5;
    switch (line.kind) {
      case LineKind::TruePositive: color = "green"; break;
      case LineKind::FalsePositive: color = "red"; break;
      case LineKind::FalseNegative: color = "orange"; break;
      case LineKind::PrunedCorrect:
        color = "yellow";
        width = 1.0;
        break;
      case LineKind::PrunedIncorrect:
        color = "pink";
        width = 1.0;
        break;
    }
    svg << "  <line x1=\"" << num(a.center_x()) << "\" y1=\"" << num(a.center_y())
        << "\" x2=\"" << num(b.center_x()) << "\" y2=\"" << num(b.center_y())
        << "\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace formpair
