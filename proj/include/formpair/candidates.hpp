#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "formpair/geometry.hpp"

namespace formpair {

// An unordered pair of box ids, stored with a_id < b_id. sight_distance is
// the shortest hit-ray length that produced the pair. Features and score are
// filled by the scoring stage.
struct CandidatePair {
  std::string a_id;
  std::string b_id;
  double sight_distance = 0;
  std::optional<std::array<double, 16>> features;
  std::optional<double> score;
};

struct LosConfig {
  int points_per_edge = 16;
  std::vector<double> fan_degrees = {-45.0, -22.5, 0.0, 22.5, 45.0};
  double max_ray_len = 600.0;
  int cap = 370;
  double shrink_factor = 0.75;
  bool opposite_class_only = true;
};

namespace detail {

// Parametric entry of a ray into a rectangle (slab test). Returns the entry
// parameter clamped to 0 when the origin is already inside, or nullopt when
// the rectangle is missed or lies entirely behind the origin.
inline std::optional<double> ray_rect_entry(double ox, double oy, double dx,
                                            double dy, const Rect& r) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();

  if (dx == 0.0) {
    if (ox < r.x_min || ox > r.x_max) return std::nullopt;
  } else {
    double t0 = (r.x_min - ox) / dx;
    double t1 = (r.x_max - ox) / dx;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (dy == 0.0) {
    if (oy < r.y_min || oy > r.y_max) return std::nullopt;
  } else {
    double t0 = (r.y_min - oy) / dy;
    double t1 = (r.y_max - oy) / dy;
    if (t0 > t1) std::swap(t0, t1);
    t_enter = std::max(t_enter, t0);
    t_exit = std::min(t_exit, t1);
  }
  if (t_enter > t_exit || t_exit < 0) return std::nullopt;
  return std::max(t_enter, 0.0);
}

struct EdgeFrame {
  double px, py;  // start corner
  double ex, ey;  // edge direction (unnormalized, full edge length)
  double nx, ny;  // outward normal
};

inline std::array<EdgeFrame, 4> edge_frames(const Rect& r) {
  return {{
      {r.x_min, r.y_min, r.width(), 0, 0, -1},   // top
      {r.x_min, r.y_max, r.width(), 0, 0, 1},    // bottom
      {r.x_min, r.y_min, 0, r.height(), -1, 0},  // left
      {r.x_max, r.y_min, 0, r.height(), 1, 0},   // right
  }};
}

}  // namespace detail

// Casts the configured ray fan from the edges of `source` and reports, per
// ray, the first box entered within `ray_len`. Boxes overlapping the source
// count as hits at distance 0. Returns (hit_id, min distance over all rays)
// sorted by id.
inline std::vector<std::pair<std::string, double>> cast_rays(
    const TextBox& source, const std::vector<TextBox>& others,
    const LosConfig& cfg, double ray_len) {
  std::map<std::string, double> hits;

  for (const auto& edge : detail::edge_frames(source.rect)) {
    for (int i = 0; i < cfg.points_per_edge; ++i) {
      const double f = (i + 0.5) / cfg.points_per_edge;
      const double ox = edge.px + f * edge.ex;
      const double oy = edge.py + f * edge.ey;
      for (const double deg : cfg.fan_degrees) {
        const double a = deg * std::numbers::pi / 180.0;
        const double c = std::cos(a), s = std::sin(a);
        const double dx = c * edge.nx - s * edge.ny;
        const double dy = s * edge.nx + c * edge.ny;

        const TextBox* best = nullptr;
        double best_t = std::numeric_limits<double>::infinity();
        for (const auto& other : others) {
          const auto t = detail::ray_rect_entry(ox, oy, dx, dy, other.rect);
          if (!t || *t > ray_len) continue;
          if (*t < best_t || (*t == best_t && best && other.id < best->id)) {
            best_t = *t;
            best = &other;
          }
        }
        if (best) {
          const auto [it, inserted] = hits.try_emplace(best->id, best_t);
          if (!inserted && best_t < it->second) it->second = best_t;
        }
      }
    }
  }
  return {hits.begin(), hits.end()};
}

// Line-of-sight candidate generation over one page. A pair is emitted if
// either box sees the other. When the pair count exceeds cfg.cap the
// effective ray length is multiplied by shrink_factor and the pass repeats;
// once the length falls below one pixel the cap-smallest pairs by
// sight_distance are kept. Output is sorted by (a_id, b_id).
inline std::vector<CandidatePair> generate_candidates(
    const std::vector<TextBox>& boxes, const LosConfig& cfg) {
  if (boxes.size() <= 1) return {};

  const auto pass = [&](double ray_len) {
    std::map<std::pair<std::string, std::string>, double> pairs;
    std::vector<TextBox> others;
    others.reserve(boxes.size() - 1);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      others.clear();
      for (std::size_t j = 0; j < boxes.size(); ++j) {
        if (j != i) others.push_back(boxes[j]);
      }
      for (const auto& [hit_id, dist] : cast_rays(boxes[i], others, cfg, ray_len)) {
        auto key = boxes[i].id < hit_id
                       ? std::make_pair(boxes[i].id, hit_id)
                       : std::make_pair(hit_id, boxes[i].id);
        const auto [it, inserted] = pairs.try_emplace(std::move(key), dist);
        if (!inserted && dist < it->second) it->second = dist;
      }
    }
    if (cfg.opposite_class_only) {
      std::map<std::string, TextClass> cls;
      for (const auto& b : boxes) cls[b.id] = b.cls;
      for (auto it = pairs.begin(); it != pairs.end();) {
        if (cls.at(it->first.first) == cls.at(it->first.second)) {
          it = pairs.erase(it);
        } else {
          ++it;
        }
      }
    }
    return pairs;
  };

  double ray_len = cfg.max_ray_len;
  auto pairs = pass(ray_len);
  bool truncate = false;
  while (static_cast<int>(pairs.size()) > cfg.cap) {
    ray_len *= cfg.shrink_factor;
    if (ray_len < 1.0) {
      truncate = true;
      break;
    }
    pairs = pass(ray_len);
  }

  std::vector<CandidatePair> out;
  out.reserve(pairs.size());
  for (const auto& [key, dist] : pairs) {
    out.push_back({key.first, key.second, dist, std::nullopt, std::nullopt});
  }
  if (truncate) {
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      if (a.sight_distance != b.sight_distance) {
        return a.sight_distance < b.sight_distance;
      }
      return std::tie(a.a_id, a.b_id) < std::tie(b.a_id, b.b_id);
    });
    out.resize(cfg.cap);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::tie(a.a_id, a.b_id) < std::tie(b.a_id, b.b_id);
    });
  }
  return out;
}

}  // namespace formpair
