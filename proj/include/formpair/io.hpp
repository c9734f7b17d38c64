#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "formpair/candidates.hpp"
#include "formpair/eval.hpp"
#include "formpair/geometry.hpp"
#include "formpair/mlp.hpp"
#include "formpair/optimizer.hpp"

namespace formpair {

// Structured file/schema violation: message carries the file, the JSON path,
// and the violated invariant.
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& file, const std::string& path, const std::string& what)
      : std::runtime_error(file + ": " + path + ": " + what) {}
};

struct VersionError : std::runtime_error {
  VersionError(const std::string& file, int got)
      : std::runtime_error(file + ": unsupported format_version " + std::to_string(got)) {}
};

inline constexpr int kFormatVersion = 1;

// One annotated page: boxes plus optional ground-truth relationships.
struct PageFile {
  std::string page_id;
  double width = 0, height = 0;
  std::vector<TextBox> boxes;
  std::vector<std::pair<std::string, std::string>> relationships;  // stored a < b

  RelationshipSet relationship_set() const {
    return {relationships.begin(), relationships.end()};
  }

  // Number of ground-truth relationships per box id.
  std::map<std::string, double> neighbor_counts() const {
    std::map<std::string, double> counts;
    for (const auto& b : boxes) counts[b.id] = 0;
    for (const auto& [a, b] : relationships) {
      counts[a] += 1;
      counts[b] += 1;
    }
    return counts;
  }
};

// Per-page candidate pairs (optionally scored), with the box summary needed
// to optimize without re-reading the pages file.
struct PairsPage {
  struct BoxSummary {
    std::string id;
    TextClass cls = TextClass::PrePrinted;
    double nn_pred = 0;
    std::optional<double> gt_neighbors;
  };
  std::string page_id;
  std::vector<BoxSummary> boxes;
  std::vector<CandidatePair> pairs;
};

struct PairsFile {
  std::string method;  // empty until scored: "distance", "heuristic", "mlp"
  std::vector<PairsPage> pages;
};

struct DecisionsPage {
  std::string page_id;
  double objective = 0;
  long long nodes_explored = 0;
  bool certified = true;
  struct Entry {
    std::string a_id, b_id;
    double p = 0;
    bool accepted = false;
    double adjusted_score = 0;
  };
  std::vector<Entry> pairs;
};

struct DecisionsFile {
  double c = 0.25;
  double T = 0.7;
  std::string neighbor_mode = "predicted";  // or "gt-noisy"
  std::uint64_t seed = 0;
  long long node_budget = 10'000'000;
  std::vector<DecisionsPage> pages;
};

namespace detail {

using json = nlohmann::json;

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "$", "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path, "$", std::string("invalid JSON: ") + e.what());
  }
}

inline void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw SchemaError(path, "$", "cannot open file for writing");
  out << j.dump(2) << '\n';
}

inline void check_version(const json& j, const std::string& file) {
  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw SchemaError(file, "format_version", "missing or non-integer");
  }
  const int v = j["format_version"].get<int>();
  if (v != kFormatVersion) throw VersionError(file, v);
}

inline const json& field(const json& j, const char* key, const std::string& file,
                         const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(file, path + "." + key, "missing field");
  return *it;
}

inline TextClass parse_class(const json& j, const std::string& file, const std::string& path) {
  const std::string s = j.get<std::string>();
  if (s == "preprinted") return TextClass::PrePrinted;
  if (s == "input") return TextClass::Input;
  throw SchemaError(file, path, "class must be \"preprinted\" or \"input\", got \"" + s + "\"");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pages
// ---------------------------------------------------------------------------

inline std::vector<PageFile> load_pages(const std::string& path) {
  using detail::field;
  const auto j = detail::parse_file(path);
  detail::check_version(j, path);

  std::vector<PageFile> pages;
  std::set<std::string> seen_pages;
  const auto& jpages = field(j, "pages", path, "$");
  for (std::size_t pi = 0; pi < jpages.size(); ++pi) {
    const std::string ppath = "pages[" + std::to_string(pi) + "]";
    const auto& jp = jpages[pi];
    PageFile page;
    page.page_id = field(jp, "page_id", path, ppath).get<std::string>();
    if (!seen_pages.insert(page.page_id).second) {
      throw SchemaError(path, ppath + ".page_id", "duplicate page id '" + page.page_id + "'");
    }
    page.width = field(jp, "width", path, ppath).get<double>();
    page.height = field(jp, "height", path, ppath).get<double>();
    if (page.width <= 0 || page.height <= 0) {
      throw SchemaError(path, ppath, "page dimensions must be positive");
    }

    std::map<std::string, TextClass> cls_by_id;
    const auto& jboxes = field(jp, "boxes", path, ppath);
    for (std::size_t bi = 0; bi < jboxes.size(); ++bi) {
      const std::string bpath = ppath + ".boxes[" + std::to_string(bi) + "]";
      const auto& jb = jboxes[bi];
      TextBox box;
      box.id = field(jb, "id", path, bpath).get<std::string>();
      box.page_id = page.page_id;
      if (!cls_by_id.emplace(box.id, TextClass::PrePrinted).second) {
        throw SchemaError(path, bpath + ".id", "duplicate box id '" + box.id + "'");
      }
      box.cls = detail::parse_class(field(jb, "class", path, bpath), path, bpath + ".class");
      cls_by_id[box.id] = box.cls;
      const auto& bbox = field(jb, "bbox", path, bpath);
      if (!bbox.is_array() || bbox.size() != 4) {
        throw SchemaError(path, bpath + ".bbox", "bbox must be [x_min, y_min, x_max, y_max]");
      }
      box.rect = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                  bbox[3].get<double>()};
      if (!box.rect.valid()) {
        throw SchemaError(path, bpath + ".bbox", "box must have positive area");
      }
      box.confidence = jb.value("confidence", 1.0);
      if (box.confidence < 0 || box.confidence > 1) {
        throw SchemaError(path, bpath + ".confidence", "must be in [0, 1]");
      }
      if (jb.contains("class_probs")) {
        const auto& probs = jb["class_probs"];
        if (!probs.is_array() || probs.size() != 2) {
          throw SchemaError(path, bpath + ".class_probs", "must be [p_preprinted, p_input]");
        }
        box.p_preprinted = probs[0].get<double>();
        box.p_input = probs[1].get<double>();
        for (const double p : {box.p_preprinted, box.p_input}) {
          if (p < 0 || p > 1) {
            throw SchemaError(path, bpath + ".class_probs", "must be in [0, 1]");
          }
        }
      } else {
        box.p_preprinted = box.cls == TextClass::PrePrinted ? 1.0 : 0.0;
        box.p_input = 1.0 - box.p_preprinted;
      }
      box.nn_pred = jb.value("nn_pred", 0.0);
      if (box.nn_pred < 0) throw SchemaError(path, bpath + ".nn_pred", "must be >= 0");
      page.boxes.push_back(std::move(box));
    }

    if (jp.contains("relationships")) {
      std::set<std::pair<std::string, std::string>> seen_rels;
      const auto& jrels = jp["relationships"];
      for (std::size_t ri = 0; ri < jrels.size(); ++ri) {
        const std::string rpath = ppath + ".relationships[" + std::to_string(ri) + "]";
        const auto& jr = jrels[ri];
        if (!jr.is_array() || jr.size() != 2) {
          throw SchemaError(path, rpath, "relationship must be [id, id]");
        }
        const std::string a = jr[0].get<std::string>();
        const std::string b = jr[1].get<std::string>();
        const auto ita = cls_by_id.find(a), itb = cls_by_id.find(b);
        if (ita == cls_by_id.end() || itb == cls_by_id.end()) {
          throw SchemaError(path, rpath, "relationship references unknown box id");
        }
        if (ita->second == itb->second) {
          throw SchemaError(path, rpath, "relationship must join boxes of opposite classes");
        }
        auto rel = normalize_rel(a, b);
        if (!seen_rels.insert(rel).second) {
          throw SchemaError(path, rpath, "duplicate relationship");
        }
        page.relationships.push_back(std::move(rel));
      }
      std::sort(page.relationships.begin(), page.relationships.end());
    }
    pages.push_back(std::move(page));
  }
  return pages;
}

inline void save_pages(const std::string& path, const std::vector<PageFile>& pages) {
  detail::json j;
  j["format_version"] = kFormatVersion;
  j["pages"] = detail::json::array();
  for (const auto& page : pages) {
    detail::json jp;
    jp["page_id"] = page.page_id;
    jp["width"] = page.width;
    jp["height"] = page.height;
    jp["boxes"] = detail::json::array();
    for (const auto& b : page.boxes) {
      detail::json jb;
      jb["id"] = b.id;
      jb["class"] = to_string(b.cls);
      jb["bbox"] = {b.rect.x_min, b.rect.y_min, b.rect.x_max, b.rect.y_max};
      jb["confidence"] = b.confidence;
      jb["class_probs"] = {b.p_preprinted, b.p_input};
      jb["nn_pred"] = b.nn_pred;
      jp["boxes"].push_back(std::move(jb));
    }
    jp["relationships"] = detail::json::array();
    for (const auto& [a, b] : page.relationships) {
      jp["relationships"].push_back({a, b});
    }
    j["pages"].push_back(std::move(jp));
  }
  detail::write_file(path, j);
}

// ---------------------------------------------------------------------------
// Candidate pairs / scores
// ---------------------------------------------------------------------------

inline PairsFile load_pairs(const std::string& path) {
  using detail::field;
  const auto j = detail::parse_file(path);
  detail::check_version(j, path);

  PairsFile out;
  out.method = j.value("method", "");
  const auto& jpages = field(j, "pages", path, "$");
  for (std::size_t pi = 0; pi < jpages.size(); ++pi) {
    const std::string ppath = "pages[" + std::to_string(pi) + "]";
    const auto& jp = jpages[pi];
    PairsPage page;
    page.page_id = field(jp, "page_id", path, ppath).get<std::string>();

    std::set<std::string> box_ids;
    const auto& jboxes = field(jp, "boxes", path, ppath);
    for (std::size_t bi = 0; bi < jboxes.size(); ++bi) {
      const std::string bpath = ppath + ".boxes[" + std::to_string(bi) + "]";
      const auto& jb = jboxes[bi];
      PairsPage::BoxSummary s;
      s.id = field(jb, "id", path, bpath).get<std::string>();
      if (!box_ids.insert(s.id).second) {
        throw SchemaError(path, bpath + ".id", "duplicate box id '" + s.id + "'");
      }
      s.cls = detail::parse_class(field(jb, "class", path, bpath), path, bpath + ".class");
      s.nn_pred = jb.value("nn_pred", 0.0);
      if (jb.contains("gt_neighbors")) s.gt_neighbors = jb["gt_neighbors"].get<double>();
      page.boxes.push_back(std::move(s));
    }

    std::set<std::pair<std::string, std::string>> seen;
    const auto& jpairs = field(jp, "pairs", path, ppath);
    for (std::size_t qi = 0; qi < jpairs.size(); ++qi) {
      const std::string qpath = ppath + ".pairs[" + std::to_string(qi) + "]";
      const auto& jq = jpairs[qi];
      CandidatePair cp;
      cp.a_id = field(jq, "a", path, qpath).get<std::string>();
      cp.b_id = field(jq, "b", path, qpath).get<std::string>();
      if (cp.a_id >= cp.b_id) {
        throw SchemaError(path, qpath, "pair ids must satisfy a < b");
      }
      if (!box_ids.count(cp.a_id) || !box_ids.count(cp.b_id)) {
        throw SchemaError(path, qpath, "pair references unknown box id");
      }
      if (!seen.insert({cp.a_id, cp.b_id}).second) {
        throw SchemaError(path, qpath, "duplicate pair");
      }
      cp.sight_distance = field(jq, "sight_distance", path, qpath).get<double>();
      if (cp.sight_distance < 0) {
        throw SchemaError(path, qpath + ".sight_distance", "must be >= 0");
      }
      if (jq.contains("score")) {
        const double s = jq["score"].get<double>();
        if (s < 0 || s > 1) throw SchemaError(path, qpath + ".score", "must be in [0, 1]");
        cp.score = s;
      }
      if (jq.contains("features")) {
        const auto& jf = jq["features"];
        if (!jf.is_array() || jf.size() != 16) {
          throw SchemaError(path, qpath + ".features", "must be a 16-vector");
        }
        std::array<double, 16> f{};
        for (int i = 0; i < 16; ++i) f[i] = jf[i].get<double>();
        cp.features = f;
      }
      page.pairs.push_back(std::move(cp));
    }
    out.pages.push_back(std::move(page));
  }
  return out;
}

inline void save_pairs(const std::string& path, const PairsFile& pairs) {
  detail::json j;
  j["format_version"] = kFormatVersion;
  if (!pairs.method.empty()) j["method"] = pairs.method;
  j["pages"] = detail::json::array();
  for (const auto& page : pairs.pages) {
    detail::json jp;
    jp["page_id"] = page.page_id;
    jp["boxes"] = detail::json::array();
    for (const auto& b : page.boxes) {
      detail::json jb;
      jb["id"] = b.id;
      jb["class"] = to_string(b.cls);
      jb["nn_pred"] = b.nn_pred;
      if (b.gt_neighbors) jb["gt_neighbors"] = *b.gt_neighbors;
      jp["boxes"].push_back(std::move(jb));
    }
    jp["pairs"] = detail::json::array();
    for (const auto& cp : page.pairs) {
      detail::json jq;
      jq["a"] = cp.a_id;
      jq["b"] = cp.b_id;
      jq["sight_distance"] = cp.sight_distance;
      if (cp.score) jq["score"] = *cp.score;
      if (cp.features) jq["features"] = *cp.features;
      jp["pairs"].push_back(std::move(jq));
    }
    j["pages"].push_back(std::move(jp));
  }
  detail::write_file(path, j);
}

// ---------------------------------------------------------------------------
// Decisions
// ---------------------------------------------------------------------------

inline DecisionsFile load_decisions(const std::string& path) {
  using detail::field;
  const auto j = detail::parse_file(path);
  detail::check_version(j, path);

  DecisionsFile out;
  const auto& jparams = field(j, "params", path, "$");
  out.c = field(jparams, "c", path, "params").get<double>();
  out.T = field(jparams, "T", path, "params").get<double>();
  out.neighbor_mode = jparams.value("neighbor_mode", "predicted");
  out.seed = jparams.value("seed", 0ull);
  out.node_budget = jparams.value("node_budget", 10'000'000ll);

  const auto& jpages = field(j, "pages", path, "$");
  for (std::size_t pi = 0; pi < jpages.size(); ++pi) {
    const std::string ppath = "pages[" + std::to_string(pi) + "]";
    const auto& jp = jpages[pi];
    DecisionsPage page;
    page.page_id = field(jp, "page_id", path, ppath).get<std::string>();
    page.objective = field(jp, "objective", path, ppath).get<double>();
    page.nodes_explored = jp.value("nodes_explored", 0ll);
    page.certified = jp.value("certified", true);
    const auto& jpairs = field(jp, "pairs", path, ppath);
    for (std::size_t qi = 0; qi < jpairs.size(); ++qi) {
      const std::string qpath = ppath + ".pairs[" + std::to_string(qi) + "]";
      const auto& jq = jpairs[qi];
      DecisionsPage::Entry e;
      e.a_id = field(jq, "a", path, qpath).get<std::string>();
      e.b_id = field(jq, "b", path, qpath).get<std::string>();
      e.p = field(jq, "p", path, qpath).get<double>();
      e.accepted = field(jq, "accepted", path, qpath).get<bool>();
      e.adjusted_score = field(jq, "adjusted_score", path, qpath).get<double>();
      page.pairs.push_back(std::move(e));
    }
    out.pages.push_back(std::move(page));
  }
  return out;
}

inline void save_decisions(const std::string& path, const DecisionsFile& d) {
  detail::json j;
  j["format_version"] = kFormatVersion;
  j["params"] = {{"c", d.c},
                 {"T", d.T},
                 {"neighbor_mode", d.neighbor_mode},
                 {"seed", d.seed},
                 {"node_budget", d.node_budget}};
  j["pages"] = detail::json::array();
  for (const auto& page : d.pages) {
    detail::json jp;
    jp["page_id"] = page.page_id;
    jp["objective"] = page.objective;
    jp["nodes_explored"] = page.nodes_explored;
    jp["certified"] = page.certified;
    jp["pairs"] = detail::json::array();
    for (const auto& e : page.pairs) {
      jp["pairs"].push_back({{"a", e.a_id},
                             {"b", e.b_id},
                             {"p", e.p},
                             {"accepted", e.accepted},
                             {"adjusted_score", e.adjusted_score}});
    }
    j["pages"].push_back(std::move(jp));
  }
  detail::write_file(path, j);
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

inline void save_model(const std::string& path, const SpatialClassifier& model) {
  if (model.input_dim() != 16) {
    throw InvalidInputError("save_model: only 16-input models are serializable");
  }
  detail::json j;
  j["format_version"] = kFormatVersion;
  j["feature_order"] = feature::names();
  const auto dense_json = [](const DenseLayer& l) {
    return detail::json{{"type", "dense"},
                        {"in", l.in()},
                        {"out", l.out()},
                        {"weights", l.weight.data},
                        {"bias", l.bias}};
  };
  const auto bn_json = [](const BatchNorm& bn) {
    return detail::json{{"type", "batch_norm"},
                        {"size", bn.gamma.size()},
                        {"gamma", bn.gamma},
                        {"beta", bn.beta},
                        {"running_mean", bn.running_mean},
                        {"running_var", bn.running_var},
                        {"eps", bn.eps},
                        {"momentum", bn.momentum}};
  };
  j["layers"] = {dense_json(model.fc1), bn_json(model.bn1), dense_json(model.fc2),
                 bn_json(model.bn2), dense_json(model.fc3)};
  j["dropout_rate"] = model.dropout_rate;
  j["metadata"] = {{"seed", model.metadata.seed},
                   {"iterations", model.metadata.iterations},
                   {"final_loss", model.metadata.final_loss}};
  detail::write_file(path, j);
}

inline SpatialClassifier load_model(const std::string& path) {
  using detail::field;
  const auto j = detail::parse_file(path);
  detail::check_version(j, path);

  const auto& order = field(j, "feature_order", path, "$");
  const auto& expected = feature::names();
  if (order.size() != expected.size()) {
    throw SchemaError(path, "feature_order", "must list 16 features");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (order[i].get<std::string>() != expected[i]) {
      throw SchemaError(path, "feature_order[" + std::to_string(i) + "]",
                        "feature order mismatch: expected '" + expected[i] + "', got '" +
                            order[i].get<std::string>() + "'");
    }
  }

  const auto& layers = field(j, "layers", path, "$");
  if (layers.size() != 5) throw SchemaError(path, "layers", "expected 5 layers");
  const auto load_dense = [&](const detail::json& jl, const std::string& lpath) {
    DenseLayer l;
    const int in = field(jl, "in", path, lpath).get<int>();
    const int out = field(jl, "out", path, lpath).get<int>();
    l.weight = Matrix(out, in);
    const auto& w = field(jl, "weights", path, lpath);
    if (static_cast<int>(w.size()) != in * out) {
      throw SchemaError(path, lpath + ".weights", "weight count does not match dimensions");
    }
    for (std::size_t i = 0; i < w.size(); ++i) l.weight.data[i] = w[i].get<double>();
    l.bias = field(jl, "bias", path, lpath).get<std::vector<double>>();
    if (static_cast<int>(l.bias.size()) != out) {
      throw SchemaError(path, lpath + ".bias", "bias count does not match dimensions");
    }
    return l;
  };
  const auto load_bn = [&](const detail::json& jl, const std::string& lpath) {
    BatchNorm bn;
    bn.gamma = field(jl, "gamma", path, lpath).get<std::vector<double>>();
    bn.beta = field(jl, "beta", path, lpath).get<std::vector<double>>();
    bn.running_mean = field(jl, "running_mean", path, lpath).get<std::vector<double>>();
    bn.running_var = field(jl, "running_var", path, lpath).get<std::vector<double>>();
    bn.eps = jl.value("eps", 1e-5);
    bn.momentum = jl.value("momentum", 0.1);
    for (const double v : bn.running_var) {
      if (v <= 0) throw SchemaError(path, lpath + ".running_var", "must be positive");
    }
    return bn;
  };

  SpatialClassifier m;
  m.fc1 = load_dense(layers[0], "layers[0]");
  m.bn1 = load_bn(layers[1], "layers[1]");
  m.fc2 = load_dense(layers[2], "layers[2]");
  m.bn2 = load_bn(layers[3], "layers[3]");
  m.fc3 = load_dense(layers[4], "layers[4]");
  m.dropout_rate = j.value("dropout_rate", 0.5);
  if (j.contains("metadata")) {
    const auto& meta = j["metadata"];
    m.metadata.seed = meta.value("seed", 0ull);
    m.metadata.iterations = meta.value("iterations", 0);
    m.metadata.final_loss = meta.value("final_loss", 0.0);
  }
  if (m.fc1.in() != 16 || m.fc3.out() != 1 || m.fc1.out() != m.fc2.in() ||
      m.fc2.out() != m.fc3.in() ||
      m.bn1.gamma.size() != static_cast<std::size_t>(m.fc1.out()) ||
      m.bn2.gamma.size() != static_cast<std::size_t>(m.fc2.out())) {
    throw SchemaError(path, "layers", "inconsistent layer dimensions");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const EvalReport& rep) {
  detail::json j;
  j["format_version"] = kFormatVersion;
  const auto class_json = [](const ClassDetectionMetrics& m) {
    return detail::json{{"ap", m.ap},           {"precision", m.precision},
                        {"recall", m.recall},   {"f_measure", m.f_measure},
                        {"tp", m.tp},           {"fp", m.fp},
                        {"fn", m.fn}};
  };
  j["detection"] = {{"preprinted", class_json(rep.det_preprinted)},
                    {"input", class_json(rep.det_input)},
                    {"map", rep.det_map},
                    {"precision", rep.det_precision},
                    {"recall", rep.det_recall},
                    {"f_measure", rep.det_f_measure},
                    {"tp", rep.det_counts.tp},
                    {"fp", rep.det_counts.fp},
                    {"fn", rep.det_counts.fn}};
  detail::json per_image = detail::json::array();
  for (const auto& [page_id, ap] : rep.rel_ap_per_image) {
    per_image.push_back({{"page_id", page_id}, {"ap", ap}});
  }
  j["relationships"] = {{"ap_pooled", rep.rel_ap_pooled},
                        {"ap_per_image_mean", rep.rel_ap_per_image_mean},
                        {"per_image", std::move(per_image)},
                        {"precision", rep.rel_precision},
                        {"recall", rep.rel_recall},
                        {"f_measure", rep.rel_f_measure},
                        {"tp", rep.rel_counts.tp},
                        {"fp", rep.rel_counts.fp},
                        {"fn", rep.rel_counts.fn}};
  return j;
}

inline void save_report(const std::string& path, const EvalReport& rep) {
  detail::write_file(path, report_to_json(rep));
}

// Aligned plain-text metric table.
inline std::string report_table(const EvalReport& rep) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  const auto row = [&](const std::string& name, double ap, double p, double r, double f,
                       long tp, long fp, long fn) {
    os << name;
    for (std::size_t i = name.size(); i < 24; ++i) os << ' ';
    os << ap << "  " << p << "  " << r << "  " << f << "  ";
    os << tp << '/' << fp << '/' << fn << '\n';
  };
  os << "                        AP     prec.  recall F-m    TP/FP/FN\n";
  row("detection preprinted", rep.det_preprinted.ap, rep.det_preprinted.precision,
      rep.det_preprinted.recall, rep.det_preprinted.f_measure, rep.det_preprinted.tp,
      rep.det_preprinted.fp, rep.det_preprinted.fn);
  row("detection input", rep.det_input.ap, rep.det_input.precision, rep.det_input.recall,
      rep.det_input.f_measure, rep.det_input.tp, rep.det_input.fp, rep.det_input.fn);
  row("detection overall", rep.det_map, rep.det_precision, rep.det_recall, rep.det_f_measure,
      rep.det_counts.tp, rep.det_counts.fp, rep.det_counts.fn);
  row("relationships", rep.rel_ap_pooled, rep.rel_precision, rep.rel_recall, rep.rel_f_measure,
      rep.rel_counts.tp, rep.rel_counts.fp, rep.rel_counts.fn);
  os << "relationship AP pooled " << rep.rel_ap_pooled << ", per-image mean "
     << rep.rel_ap_per_image_mean << '\n';
  return os.str();
}

}  // namespace formpair
