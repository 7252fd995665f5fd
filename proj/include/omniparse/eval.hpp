/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Benchmark records, dataset loading, metrics and report rendering for the
// four evaluation suites: SeeAssign, ScreenSpot, Mind2Web and AITW.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "omniparse/adapters.hpp"
#include "omniparse/errors.hpp"
#include "omniparse/geometry.hpp"
#include "omniparse/prompting.hpp"

namespace omniparse::eval {

enum class Suite { seeassign, screenspot, mind2web, aitw };

inline std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::seeassign: return "seeassign";
    case Suite::screenspot: return "screenspot";
    case Suite::mind2web: return "mind2web";
    case Suite::aitw: return "aitw";
  }
  return "seeassign";
}

inline Suite suite_from_string(std::string_view s) {
  if (s == "seeassign") return Suite::seeassign;
  if (s == "screenspot") return Suite::screenspot;
  if (s == "mind2web") return Suite::mind2web;
  if (s == "aitw") return Suite::aitw;
  throw InvalidArgument("unknown suite '" + std::string(s) + "'");
}

inline constexpr int kDatasetSchemaVersion = 1;

// -- records -------------------------------------------------------------------------

enum class TargetType { text, icon_widget };

struct SeeAssignTask {
  std::string image;  // resolved path
  std::string image_id;
  std::string task_text;
  int gt_element_id = 0;
  int n_boxes = 1;
  Platform platform = Platform::web;
};

struct ScreenSpotRecord {
  std::string image;
  std::string image_id;
  std::string instruction;
  BBox gt_bbox;
  Platform platform = Platform::web;
  TargetType target_type = TargetType::text;
};

enum class M2WCategory { cross_task, cross_website, cross_domain };

inline std::string_view to_string(M2WCategory c) {
  switch (c) {
    case M2WCategory::cross_task: return "cross_task";
    case M2WCategory::cross_website: return "cross_website";
    case M2WCategory::cross_domain: return "cross_domain";
  }
  return "cross_task";
}

struct M2WStep {
  std::string task_id;
  int step_index = 0;
  std::string image;
  std::string image_id;
  std::string task_text;
  BBox gt_bbox;
  ActionKind gt_operation = ActionKind::click;
  std::optional<std::string> gt_value;
  M2WCategory category = M2WCategory::cross_task;
  ActionHistory history;
};

enum class AitwCategory { general, install, googleapps, single, webshopping };

inline constexpr std::array<AitwCategory, 5> kAitwCategories{AitwCategory::general, AitwCategory::install,
                                                             AitwCategory::googleapps, AitwCategory::single,
                                                             AitwCategory::webshopping};

inline std::string_view to_string(AitwCategory c) {
  switch (c) {
    case AitwCategory::general: return "general";
    case AitwCategory::install: return "install";
    case AitwCategory::googleapps: return "googleapps";
    case AitwCategory::single: return "single";
    case AitwCategory::webshopping: return "webshopping";
  }
  return "general";
}

struct AitwGold {
  ActionKind kind = ActionKind::click;
  std::optional<Point> point;  // tap location for click
  std::optional<std::string> value;
};

struct AitwStep {
  std::string episode_id;
  int step_index = 0;
  std::string image;
  std::string image_id;
  std::string instruction;
  int width = 0;   // screen size, 0 until known
  int height = 0;
  AitwGold gt_action;
  AitwCategory category = AitwCategory::general;
  ActionHistory history;
};

// -- predictions ------------------------------------------------------------------------

/// Agent output for a step together with the box of the element it picked.
/// `element` is empty when the chosen id did not exist on the parsed screen.
struct StepPrediction {
  AgentAction action;
  std::optional<BBox> element;
  /// Every element box on the parsed screen (AITW same-element rule).
  std::vector<BBox> screen_elements;
};

struct MetricsReport {
  std::string suite;
  std::map<std::string, double> buckets;
  std::map<std::string, int> counts;
  double overall = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// -- metrics ------------------------------------------------------------------------------

enum class Difficulty { easy, medium, hard };

inline std::string_view to_string(Difficulty d) {
  return d == Difficulty::easy ? "easy" : d == Difficulty::medium ? "medium" : "hard";
}

/// Fewer than 10 boxes is easy, 10-40 medium, more than 40 hard.
inline Difficulty difficulty_bucket(int n_boxes) {
  if (n_boxes < 1) throw InvalidArgument("n_boxes must be >= 1");
  if (n_boxes < 10) return Difficulty::easy;
  if (n_boxes <= 40) return Difficulty::medium;
  return Difficulty::hard;
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline std::string lower_trim(const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  return t;
}

struct Mean {
  double sum = 0;
  int n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double value() const { return n == 0 ? 0.0 : sum / n; }
};

inline void check_sizes(std::size_t records, std::size_t predictions) {
  if (records != predictions)
    throw InvalidArgument("prediction count " + std::to_string(predictions) + " does not match record count " +
                          std::to_string(records));
}

}  // namespace detail

/// Token-level F1 between [OP] + value tokens of the prediction and gold.
inline double op_f1(const AgentAction& pred, ActionKind gold_op, const std::optional<std::string>& gold_value) {
  std::vector<std::string> p{std::string(action_name(pred.kind))};
  std::vector<std::string> g{std::string(action_name(gold_op))};
  if (pred.value) for (auto& t : detail::split_ws(*pred.value)) p.push_back(std::move(t));
  if (gold_value) for (auto& t : detail::split_ws(*gold_value)) g.push_back(std::move(t));

  std::map<std::string, int> gold_counts;
  for (const auto& t : g) ++gold_counts[t];
  int common = 0;
  for (const auto& t : p) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / p.size();
  const double recall = static_cast<double>(common) / g.size();
  return 2 * precision * recall / (precision + recall);
}

/// Accuracy per difficulty bucket plus overall, over task-aligned predictions
/// (nullopt = unparseable or missing, always wrong).
inline MetricsReport score_seeassign(const std::vector<SeeAssignTask>& tasks,
                                     const std::vector<std::optional<int>>& predictions) {
  detail::check_sizes(tasks.size(), predictions.size());
  std::map<std::string, detail::Mean> buckets;
  detail::Mean all;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const double ok = predictions[i] && *predictions[i] == tasks[i].gt_element_id ? 1.0 : 0.0;
    buckets[std::string(to_string(difficulty_bucket(tasks[i].n_boxes)))].add(ok);
    all.add(ok);
  }
  MetricsReport r{"seeassign", {}, {}, all.value()};
  for (const auto& [k, m] : buckets) {
    r.buckets[k] = m.value();
    r.counts[k] = m.n;
  }
  return r;
}

inline std::string screenspot_cell(const ScreenSpotRecord& rec) {
  return std::string(to_string(rec.platform)) + "/" + (rec.target_type == TargetType::text ? "text" : "icon_widget");
}

/// Correct iff the centre of the predicted box lies in the ground-truth box.
/// Buckets are the platform x target-type cells plus "average", their
/// unweighted mean; overall is the mean over records.
inline MetricsReport score_screenspot(const std::vector<ScreenSpotRecord>& records,
                                      const std::vector<std::optional<BBox>>& predictions) {
  detail::check_sizes(records.size(), predictions.size());
  std::map<std::string, detail::Mean> cells;
  detail::Mean all;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double ok = predictions[i] && contains_point(records[i].gt_bbox, center(*predictions[i])) ? 1.0 : 0.0;
    cells[screenspot_cell(records[i])].add(ok);
    all.add(ok);
  }
  MetricsReport r{"screenspot", {}, {}, all.value()};
  detail::Mean average;
  for (const auto& [k, m] : cells) {
    r.buckets[k] = m.value();
    r.counts[k] = m.n;
    average.add(m.value());
  }
  if (!cells.empty()) r.buckets["average"] = average.value();
  return r;
}

struct M2WStepOutcome {
  bool element_correct = false;
  double op_f1 = 0;
  bool step_success = false;
};

inline M2WStepOutcome score_m2w_step(const M2WStep& step, const std::optional<StepPrediction>& pred) {
  if (!pred) return {};
  M2WStepOutcome o;
  o.element_correct = pred->element && contains_point(step.gt_bbox, center(*pred->element));
  o.op_f1 = op_f1(pred->action, step.gt_operation, step.gt_value);
  o.step_success = o.element_correct && o.op_f1 == 1.0;
  return o;
}

/// Per category: element accuracy, mean op F1 and step success rate, both as
/// step-level (micro) means and as means of per-task means (macro, under
/// "<category>/macro/..."). Overall is the micro step success rate.
inline MetricsReport score_mind2web(const std::vector<M2WStep>& steps,
                                    const std::vector<std::optional<StepPrediction>>& predictions) {
  detail::check_sizes(steps.size(), predictions.size());
  struct Acc {
    detail::Mean ele, f1, sr;
  };
  std::map<std::string, Acc> micro;
  std::map<std::string, std::map<std::string, Acc>> per_task;
  detail::Mean overall;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto o = score_m2w_step(steps[i], predictions[i]);
    const std::string cat(to_string(steps[i].category));
    for (Acc* a : {&micro[cat], &per_task[cat][steps[i].task_id]}) {
      a->ele.add(o.element_correct ? 1.0 : 0.0);
      a->f1.add(o.op_f1);
      a->sr.add(o.step_success ? 1.0 : 0.0);
    }
    overall.add(o.step_success ? 1.0 : 0.0);
  }
  MetricsReport r{"mind2web", {}, {}, overall.value()};
  for (const auto& [cat, a] : micro) {
    r.buckets[cat + "/ele_acc"] = a.ele.value();
    r.buckets[cat + "/op_f1"] = a.f1.value();
    r.buckets[cat + "/step_sr"] = a.sr.value();
    r.counts[cat] = a.ele.n;
    Acc macro;
    for (const auto& [task, t] : per_task.at(cat)) {
      macro.ele.add(t.ele.value());
      macro.f1.add(t.f1.value());
      macro.sr.add(t.sr.value());
    }
    r.buckets[cat + "/macro/ele_acc"] = macro.ele.value();
    r.buckets[cat + "/macro/op_f1"] = macro.f1.value();
    r.buckets[cat + "/macro/step_sr"] = macro.sr.value();
  }
  return r;
}

inline constexpr double kAitwTapTolerance = 0.14;  // fraction of the screen diagonal

/// Action matching for one AITW step.
inline bool aitw_step_correct(const AitwStep& step, const std::optional<StepPrediction>& pred) {
  if (!pred || pred->action.kind != step.gt_action.kind) return false;
  switch (step.gt_action.kind) {
    case ActionKind::click: {
      if (!pred->element || !step.gt_action.point) return false;
      const Point p = center(*pred->element);
      const Point g = *step.gt_action.point;
      for (const auto& e : pred->screen_elements)
        if (contains_point(e, p) && contains_point(e, g)) return true;
      if (step.width <= 0 || step.height <= 0) throw InvalidArgument("aitw step without screen size");
      return distance(p, g) <= kAitwTapTolerance * std::hypot(step.width, step.height);
    }
    case ActionKind::type:
      return detail::lower_trim(pred->action.value.value_or("")) == detail::lower_trim(step.gt_action.value.value_or(""));
    default:
      return true;
  }
}

/// Mean step correctness per category; overall is the unweighted mean of the
/// categories present in the data.
inline MetricsReport score_aitw(const std::vector<AitwStep>& steps,
                                const std::vector<std::optional<StepPrediction>>& predictions) {
  detail::check_sizes(steps.size(), predictions.size());
  std::map<std::string, detail::Mean> cats;
  for (std::size_t i = 0; i < steps.size(); ++i)
    cats[std::string(to_string(steps[i].category))].add(aitw_step_correct(steps[i], predictions[i]) ? 1.0 : 0.0);
  MetricsReport r{"aitw", {}, {}, 0.0};
  detail::Mean overall;
  for (const auto& [k, m] : cats) {
    r.buckets[k] = m.value();
    r.counts[k] = m.n;
    overall.add(m.value());
  }
  r.overall = overall.value();
  return r;
}

// -- report rendering -------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["suite"] = r.suite;
  j["overall"] = r.overall;
  j["buckets"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.buckets) j["buckets"][k] = v;
  j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.counts) j["counts"][k] = v;
  return j;
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.suite = j.at("suite").get<std::string>();
  r.overall = j.at("overall").get<double>();
  r.buckets = j.at("buckets").get<std::map<std::string, double>>();
  r.counts = j.at("counts").get<std::map<std::string, int>>();
  return r;
}

namespace detail {

inline std::string fmt_cell(const MetricsReport& r, const std::string& key, double scale, int decimals) {
  auto it = r.buckets.find(key);
  if (it == r.buckets.end()) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, it->second * scale);
  return buf;
}

inline std::string fmt_value(double v, double scale, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v * scale);
  return buf;
}

inline std::string render_rows(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (widths.size() <= c) widths.push_back(0);
      widths[c] = std::max(widths[c], row[c].size());
    }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out += "|";
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      out += " " + rows[r][c] + std::string(widths[c] - rows[r][c].size(), ' ') + " |";
    out += "\n";
    if (r == 0) {
      out += "|";
      for (auto w : widths) out += std::string(w + 2, '-') + "|";
      out += "\n";
    }
  }
  return out;
}

}  // namespace detail

/// Plain-text table laid out like the published result tables for the suite.
inline std::string render_table(const MetricsReport& r, const std::string& row_label = "agent") {
  using detail::fmt_cell;
  std::vector<std::vector<std::string>> rows;
  if (r.suite == "seeassign") {
    rows.push_back({"", "Easy", "Medium", "Hard", "Overall"});
    rows.push_back({row_label, fmt_cell(r, "easy", 1, 3), fmt_cell(r, "medium", 1, 3), fmt_cell(r, "hard", 1, 3),
                    detail::fmt_value(r.overall, 1, 3)});
  } else if (r.suite == "screenspot") {
    rows.push_back({"Methods", "Mobile Text", "Mobile Icon/Widget", "Desktop Text", "Desktop Icon/Widget", "Web Text",
                    "Web Icon/Widget", "Average"});
    std::vector<std::string> row{row_label};
    for (const char* p : {"mobile", "desktop", "web"})
      for (const char* t : {"text", "icon_widget"}) row.push_back(fmt_cell(r, std::string(p) + "/" + t, 100, 1) + "%");
    row.push_back(fmt_cell(r, "average", 100, 1) + "%");
    rows.push_back(row);
  } else if (r.suite == "mind2web") {
    std::vector<std::string> head{"Methods"};
    std::vector<std::string> row{row_label};
    for (const auto& [cat, title] : std::vector<std::pair<std::string, std::string>>{
             {"cross_website", "Cross-Website"}, {"cross_domain", "Cross-Domain"}, {"cross_task", "Cross-Task"}}) {
      head.push_back(title + " Ele.Acc");
      head.push_back(title + " Op.F1");
      head.push_back(title + " Step SR");
      row.push_back(fmt_cell(r, cat + "/ele_acc", 100, 1));
      row.push_back(fmt_cell(r, cat + "/op_f1", 100, 1));
      row.push_back(fmt_cell(r, cat + "/step_sr", 100, 1));
    }
    rows.push_back(head);
    rows.push_back(row);
  } else if (r.suite == "aitw") {
    rows.push_back({"Methods", "General", "Install", "GoogleApps", "Single", "WebShopping", "Overall"});
    std::vector<std::string> row{row_label};
    for (auto c : kAitwCategories) row.push_back(fmt_cell(r, std::string(to_string(c)), 100, 1));
    row.push_back(detail::fmt_value(r.overall, 100, 1));
    rows.push_back(row);
  } else {
    throw InvalidArgument("unknown suite '" + r.suite + "'");
  }
  return detail::render_rows(rows);
}

// -- dataset loading ------------------------------------------------------------------------

template <class Record>
struct Dataset {
  Suite suite;
  std::vector<Record> records;
};

namespace detail {

inline std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path, Suite expected) {
  std::ifstream in(path);
  if (!in) throw DatasetFormatError("cannot read dataset " + path.string());
  std::vector<nlohmann::json> rows;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DatasetFormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!header_seen) {
      header_seen = true;
      if (!j.contains("suite") || !j.contains("schema_version"))
        throw DatasetFormatError(path.string() + ": first line must be a {suite, schema_version} header");
      if (j["suite"] != to_string(expected))
        throw DatasetFormatError(path.string() + ": dataset is for suite '" + j["suite"].dump() + "', expected '" +
                                 std::string(to_string(expected)) + "'");
      if (j["schema_version"] != kDatasetSchemaVersion)
        throw DatasetFormatError(path.string() + ": unsupported schema_version " + j["schema_version"].dump());
      continue;
    }
    j["__line"] = lineno;
    rows.push_back(std::move(j));
  }
  if (!header_seen) throw DatasetFormatError(path.string() + ": empty dataset");
  return rows;
}

inline BBox gt_box(const nlohmann::json& j) {
  const BBox b{j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(), j.at("h").get<double>()};
  if (!b.valid()) throw InvalidArgument("invalid ground-truth box");
  return b;
}

inline std::pair<std::string, std::string> image_ref(const nlohmann::json& j, const std::filesystem::path& base) {
  const std::filesystem::path rel = j.at("image").get<std::string>();
  const auto full = rel.is_absolute() ? rel : base / rel;
  return {full.string(), j.value("image_id", rel.stem().string())};
}

inline ActionHistory history_of(const nlohmann::json& j) {
  return ActionHistory::from(j.value("history", std::vector<std::string>{}));
}

template <class F>
auto load_rows(const std::filesystem::path& path, Suite suite, F&& convert) {
  const auto base = path.parent_path();
  using Record = decltype(convert(nlohmann::json{}, base));
  Dataset<Record> ds{suite, {}};
  for (const auto& j : read_jsonl(path, suite)) {
    try {
      ds.records.push_back(convert(j, base));
    } catch (const std::exception& e) {
      throw DatasetFormatError(path.string() + ":" + j["__line"].dump() + ": " + e.what());
    }
  }
  return ds;
}

inline ActionKind operation_from(const std::string& s) {
  auto k = action_from_name(s);
  if (!k) throw InvalidArgument("unknown operation '" + s + "'");
  return *k;
}

}  // namespace detail

inline Dataset<SeeAssignTask> load_seeassign(const std::filesystem::path& path) {
  return detail::load_rows(path, Suite::seeassign, [](const nlohmann::json& j, const std::filesystem::path& base) {
    SeeAssignTask t;
    std::tie(t.image, t.image_id) = detail::image_ref(j, base);
    t.task_text = j.at("task").get<std::string>();
    t.gt_element_id = j.at("gt_element_id").get<int>();
    t.n_boxes = j.at("n_boxes").get<int>();
    t.platform = platform_from_string(j.value("platform", std::string("web")));
    if (t.task_text.empty()) throw InvalidArgument("empty task");
    if (t.n_boxes < 1 || t.gt_element_id < 0 || t.gt_element_id >= t.n_boxes)
      throw InvalidArgument("gt_element_id must be in [0, n_boxes)");
    return t;
  });
}

inline Dataset<ScreenSpotRecord> load_screenspot(const std::filesystem::path& path) {
  return detail::load_rows(path, Suite::screenspot, [](const nlohmann::json& j, const std::filesystem::path& base) {
    ScreenSpotRecord r;
    std::tie(r.image, r.image_id) = detail::image_ref(j, base);
    r.instruction = j.at("instruction").get<std::string>();
    r.gt_bbox = detail::gt_box(j.at("gt_bbox"));
    r.platform = platform_from_string(j.at("platform").get<std::string>());
    const auto tt = j.at("target_type").get<std::string>();
    if (tt == "text") {
      r.target_type = TargetType::text;
    } else if (tt == "icon_widget" || tt == "icon") {
      r.target_type = TargetType::icon_widget;
    } else {
      throw InvalidArgument("unknown target_type '" + tt + "'");
    }
    return r;
  });
}

inline Dataset<M2WStep> load_mind2web(const std::filesystem::path& path) {
  return detail::load_rows(path, Suite::mind2web, [](const nlohmann::json& j, const std::filesystem::path& base) {
    M2WStep s;
    s.task_id = j.at("task_id").get<std::string>();
    s.step_index = j.at("step_index").get<int>();
    std::tie(s.image, s.image_id) = detail::image_ref(j, base);
    s.task_text = j.at("task").get<std::string>();
    s.gt_bbox = detail::gt_box(j.at("gt_bbox"));
    s.gt_operation = detail::operation_from(j.at("gt_operation").get<std::string>());
    if (s.gt_operation != ActionKind::click && s.gt_operation != ActionKind::type &&
        s.gt_operation != ActionKind::select)
      throw InvalidArgument("mind2web operation must be CLICK, TYPE or SELECT");
    if (j.contains("gt_value") && !j["gt_value"].is_null()) s.gt_value = j["gt_value"].get<std::string>();
    if (needs_value(s.gt_operation) && !s.gt_value) throw InvalidArgument("TYPE/SELECT step without gt_value");
    const auto cat = j.at("category").get<std::string>();
    if (cat == "cross_task") {
      s.category = M2WCategory::cross_task;
    } else if (cat == "cross_website") {
      s.category = M2WCategory::cross_website;
    } else if (cat == "cross_domain") {
      s.category = M2WCategory::cross_domain;
    } else {
      throw InvalidArgument("unknown category '" + cat + "'");
    }
    s.history = detail::history_of(j);
    return s;
  });
}

inline Dataset<AitwStep> load_aitw(const std::filesystem::path& path) {
  return detail::load_rows(path, Suite::aitw, [](const nlohmann::json& j, const std::filesystem::path& base) {
    AitwStep s;
    s.episode_id = j.at("episode_id").get<std::string>();
    s.step_index = j.at("step_index").get<int>();
    std::tie(s.image, s.image_id) = detail::image_ref(j, base);
    s.instruction = j.at("instruction").get<std::string>();
    s.width = j.value("width", 0);
    s.height = j.value("height", 0);
    const auto& ga = j.at("gt_action");
    const auto kind = action_from_name(ga.at("kind").get<std::string>());
    if (!kind || *kind == ActionKind::select) throw InvalidArgument("unknown aitw action kind");
    s.gt_action.kind = *kind;
    if (ga.contains("point")) s.gt_action.point = Point{ga["point"].at("x").get<double>(), ga["point"].at("y").get<double>()};
    if (ga.contains("value") && !ga["value"].is_null()) s.gt_action.value = ga["value"].get<std::string>();
    if (s.gt_action.kind == ActionKind::click && !s.gt_action.point) throw InvalidArgument("click without point");
    if (s.gt_action.kind == ActionKind::type && !s.gt_action.value) throw InvalidArgument("type without value");
    const auto cat = j.at("category").get<std::string>();
    bool found = false;
    for (auto c : kAitwCategories)
      if (to_string(c) == cat) {
        s.category = c;
        found = true;
      }
    if (!found) throw InvalidArgument("unknown category '" + cat + "'");
    s.history = detail::history_of(j);
    return s;
  });
}

}  // namespace omniparse::eval
