/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Shared test fixtures: data paths, fixture-backed adapters, hand-labeled
// predictions for the 10-record eval datasets, and mock-table builders.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omniparse/config.hpp"
#include "omniparse/eval.hpp"
#include "omniparse/factory.hpp"
#include "omniparse/runner.hpp"

#ifndef OMNIPARSE_TEST_DATA
#error "OMNIPARSE_TEST_DATA must point at tests/data"
#endif

namespace fixtures {

namespace fs = std::filesystem;
using omniparse::BBox;
using omniparse::eval::StepPrediction;

inline fs::path data_dir() { return OMNIPARSE_TEST_DATA; }
inline fs::path screen(const std::string& name) { return data_dir() / "screens" / (name + ".png"); }
inline fs::path golden(const std::string& file) { return data_dir() / "golden" / file; }
inline fs::path dataset(omniparse::eval::Suite s) {
  return data_dir() / "eval" / (std::string(omniparse::eval::to_string(s)) + ".jsonl");
}

inline const std::vector<omniparse::eval::Suite>& all_suites() {
  static const std::vector<omniparse::eval::Suite> s{omniparse::eval::Suite::seeassign, omniparse::eval::Suite::screenspot,
                                                     omniparse::eval::Suite::mind2web, omniparse::eval::Suite::aitw};
  return s;
}

inline omniparse::AppConfig config() { return omniparse::load_config(data_dir() / "fixture.toml"); }

inline omniparse::Adapters adapters() { return omniparse::make_adapters(config()); }

inline std::string read_text(const fs::path& p) {
  const auto bytes = omniparse::read_file_bytes(p);
  return std::string(bytes.begin(), bytes.end());
}

inline omniparse::eval::SuiteOptions suite_options(const fs::path& out_dir = {}) {
  const auto cfg = config();
  omniparse::eval::SuiteOptions o;
  o.adapters = omniparse::make_adapters(cfg);
  o.pipeline = cfg.pipeline();
  o.concurrency = 4;
  o.out_dir = out_dir;
  o.row_label = "OmniParser";
  return o;
}

// -- hand-labeled predictions ----------------------------------------------------------
//
// Each suite gets one prediction per dataset record and the report worked out
// by hand from the dataset (see the per-line comments).

inline std::vector<std::optional<int>> seeassign_predictions() {
  // gt: 5 0 12 2 | 3 6 0 7 | 15 47     buckets: medium x4, easy x4, hard x2
  return {5, 1, 12, std::nullopt, 3, 6, 7, 7, 15, 46};
}

inline omniparse::eval::MetricsReport seeassign_expected() {
  // medium 2/4, easy 3/4, hard 1/2, overall 6/10
  return {"seeassign", {{"easy", 0.75}, {"hard", 0.5}, {"medium", 0.5}}, {{"easy", 4}, {"hard", 2}, {"medium", 4}}, 0.6};
}

inline std::vector<std::optional<BBox>> screenspot_predictions() {
  return {
      BBox{400, 8, 24, 24},     // centre (412,20) in gt          ok   mobile/icon
      BBox{400, 120, 48, 24},   // centre (424,132) misses label   no   mobile/text
      BBox{30, 230, 240, 36},   //                                 ok   web/text
      std::nullopt,             //                                 no   web/icon
      BBox{160, 260, 100, 36},  //                                 ok   desktop/text
      BBox{40, 74, 44, 18},     // the Wi-Fi text, not the switch  no   desktop/icon
      BBox{0, 0, 40, 40},       // centre (20,20) on the gt corner ok   mobile/icon
      BBox{80, 286, 148, 18},   //                                 ok   mobile/text
      BBox{38, 178, 24, 24},    // checkbox, centre (50,190)       no   web/text
      BBox{300, 412, 40, 40},   //                                 ok   desktop/icon
  };
}

inline omniparse::eval::MetricsReport screenspot_expected() {
  return {"screenspot",
          {{"desktop/icon_widget", 0.5},
           {"desktop/text", 1.0},
           {"mobile/icon_widget", 1.0},
           {"mobile/text", 0.5},
           {"web/icon_widget", 0.0},
           {"web/text", 0.5},
           {"average", 3.5 / 6}},
          {{"desktop/icon_widget", 2}, {"desktop/text", 1}, {"mobile/icon_widget", 2}, {"mobile/text", 2},
           {"web/icon_widget", 1}, {"web/text", 2}},
          0.6};
}

inline StepPrediction step(omniparse::ActionKind k, std::optional<BBox> box, std::optional<std::string> value = {},
                           std::optional<int> id = {}) {
  StepPrediction p;
  p.action.kind = k;
  p.action.value = std::move(value);
  p.action.target_id = id;
  p.element = box;
  return p;
}

inline std::vector<std::optional<StepPrediction>> mind2web_predictions() {
  using K = omniparse::ActionKind;
  return {
      step(K::type, BBox{30, 100, 240, 32}, "ada@example.com", 3),  // ele 1  f1 1    sr 1
      step(K::type, BBox{30, 170, 240, 32}, "hunter 2", 5),         // ele 1  f1 0.4  sr 0
      step(K::click, BBox{30, 100, 240, 32}, {}, 3),                // ele 0  f1 1    sr 0
      step(K::click, BBox{400, 120, 48, 24}, {}, 7),                // ele 1  f1 1    sr 1
      std::nullopt,                                                 // ele 0  f1 0    sr 0
      step(K::select, BBox{400, 70, 48, 24}, "off", 5),             // ele 1  f1 0.5  sr 0
      step(K::click, BBox{8, 8, 24, 24}, {}, 0),                    // ele 1  f1 1    sr 1
      step(K::type, BBox{76, 20, 40, 40}, "hello", 1),              // ele 1  f1 0    sr 0
      step(K::click, std::nullopt, {}, 99),                         // ele 0  f1 1    sr 0
      step(K::click, BBox{398, 6, 28, 28}, {}, 1),                  // ele 1  f1 1    sr 1
  };
}

inline omniparse::eval::MetricsReport mind2web_expected() {
  return {"mind2web",
          {
              // steps 0,1,2,9 (tasks t1 x3, t6 x1)
              {"cross_task/ele_acc", 0.75},
              {"cross_task/op_f1", 3.4 / 4},
              {"cross_task/step_sr", 0.5},
              {"cross_task/macro/ele_acc", (2.0 / 3 + 1) / 2},
              {"cross_task/macro/op_f1", (2.4 / 3 + 1) / 2},
              {"cross_task/macro/step_sr", (1.0 / 3 + 1) / 2},
              // steps 3,4,8 (t2 x2, t5 x1)
              {"cross_website/ele_acc", 1.0 / 3},
              {"cross_website/op_f1", 2.0 / 3},
              {"cross_website/step_sr", 1.0 / 3},
              {"cross_website/macro/ele_acc", 0.25},
              {"cross_website/macro/op_f1", 0.75},
              {"cross_website/macro/step_sr", 0.25},
              // steps 5,6,7 (t3 x2, t4 x1)
              {"cross_domain/ele_acc", 1.0},
              {"cross_domain/op_f1", 0.5},
              {"cross_domain/step_sr", 1.0 / 3},
              {"cross_domain/macro/ele_acc", 1.0},
              {"cross_domain/macro/op_f1", 0.375},
              {"cross_domain/macro/step_sr", 0.25},
          },
          {{"cross_domain", 3}, {"cross_task", 4}, {"cross_website", 3}},
          0.4};
}

/// Element boxes of a golden parsed screen.
inline std::vector<BBox> golden_boxes(const std::string& name) {
  const auto j = nlohmann::json::parse(read_text(golden(name + ".parsed.json")));
  std::vector<BBox> out;
  for (const auto& e : j["elements"]) out.push_back(omniparse::detail::box_from(e["box"]));
  return out;
}

inline std::vector<std::optional<StepPrediction>> aitw_predictions() {
  using K = omniparse::ActionKind;
  auto with_screen = [](StepPrediction p, const std::string& name) {
    p.screen_elements = golden_boxes(name);
    return std::optional(p);
  };
  return {
      with_screen(step(K::click, BBox{400, 70, 48, 24}, {}, 5), "settings"),   // same element                 ok
      with_screen(step(K::status_complete, {}), "settings"),                   // kind match                   ok
      with_screen(step(K::click, BBox{76, 20, 40, 40}, {}, 1), "grid"),        // 56 px <= 0.14 * 600 = 84     ok
      with_screen(step(K::press_back, {}), "grid"),                            // wanted PRESS_HOME            no
      with_screen(step(K::type, BBox{30, 100, 240, 32}, "ADA@Example.com", 3), "login"),  // case-folded        ok
      std::nullopt,                                                            // unparseable                  no
      with_screen(step(K::click, BBox{30, 230, 240, 36}, {}, 6), "login"),     // 110 px apart, same button    ok
      with_screen(step(K::click, BBox{40, 260, 100, 36}, {}, 12), "settings"), // centre on gold               ok
      with_screen(step(K::press_back, {}), "settings"),                        //                              ok
      with_screen(step(K::click, BBox{20, 412, 40, 40}, {}, 42), "grid"),      // 280 px, different tiles      no
  };
}

/// AITW records with screen sizes filled from their images, as the runner does.
inline std::vector<omniparse::eval::AitwStep> aitw_records() {
  auto r = omniparse::eval::load_aitw(dataset(omniparse::eval::Suite::aitw)).records;
  for (auto& s : r) {
    const auto img = omniparse::load_image(s.image, s.image_id);
    s.width = img.width();
    s.height = img.height();
  }
  return r;
}

inline omniparse::eval::MetricsReport aitw_expected() {
  return {"aitw",
          {{"general", 1.0}, {"googleapps", 0.5}, {"install", 0.5}, {"single", 0.5}, {"webshopping", 1.0}},
          {{"general", 2}, {"googleapps", 2}, {"install", 2}, {"single", 2}, {"webshopping", 2}},
          0.7};
}

// -- mock tables --------------------------------------------------------------------------

using AnswerFn = std::function<std::string(std::size_t index, const omniparse::ParsedScreen&)>;

/// Builds digest -> response for every record, producing the exact requests
/// the runner will send.
template <class Record>
std::map<std::string, std::string> mock_table(const std::vector<Record>& records,
                                              const omniparse::eval::SuiteOptions& opt, const AnswerFn& answer) {
  using Traits = omniparse::eval::detail::SuiteTraits<Record>;
  std::map<std::string, std::string> table;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto img = omniparse::load_image(records[i].image, records[i].image_id);
    const auto s = omniparse::parse_screen(img, opt.adapters, opt.pipeline);
    omniparse::ChatRequest req;
    req.user_text = Traits::prompt(records[i], s, opt);
    req.images.push_back(s.overlay);
    table[omniparse::request_digest(req)] = answer(i, s);
  }
  return table;
}

/// Element whose box best matches `gt` (max IoU), used to answer as an oracle.
inline int best_element(const omniparse::ParsedScreen& s, const BBox& gt) {
  int best = -1;
  double best_iou = -1;
  for (const auto& e : s.elements) {
    const double v = omniparse::iou(e.bbox, gt);
    if (v > best_iou) {
      best = e.id;
      best_iou = v;
    }
  }
  return best;
}

/// Smallest element containing a point.
inline int element_at(const omniparse::ParsedScreen& s, omniparse::Point p) {
  int best = -1;
  double best_area = 0;
  for (const auto& e : s.elements)
    if (omniparse::contains_point(e.bbox, p) && (best < 0 || omniparse::area(e.bbox) < best_area)) {
      best = e.id;
      best_area = omniparse::area(e.bbox);
    }
  return best;
}

inline std::string box_answer(int id) {
  return "The target is clearly marked.\n```Box with label ID: [" + std::to_string(id) + "]```";
}

/// Oracle answers built from gold labels: every suite should score 1.0.
inline std::map<std::string, std::string> oracle_table(omniparse::eval::Suite suite, const omniparse::eval::SuiteOptions& opt) {
  using namespace omniparse;
  using namespace omniparse::eval;
  const auto path = dataset(suite);
  switch (suite) {
    case Suite::seeassign: {
      const auto r = load_seeassign(path).records;
      return mock_table(r, opt, [&](std::size_t i, const ParsedScreen&) { return box_answer(r[i].gt_element_id); });
    }
    case Suite::screenspot: {
      const auto r = load_screenspot(path).records;
      return mock_table(r, opt, [&](std::size_t i, const ParsedScreen& s) { return box_answer(best_element(s, r[i].gt_bbox)); });
    }
    case Suite::mind2web: {
      const auto r = load_mind2web(path).records;
      return mock_table(r, opt, [&](std::size_t i, const ParsedScreen& s) {
        AgentAction a{r[i].gt_operation, best_element(s, r[i].gt_bbox), r[i].gt_value};
        return "Analysis done.\n" + format_action(a);
      });
    }
    case Suite::aitw: {
      const auto r = load_aitw(path).records;
      return mock_table(r, opt, [&](std::size_t i, const ParsedScreen& s) {
        const auto& g = r[i].gt_action;
        AgentAction a{g.kind, std::nullopt, std::nullopt};
        if (g.kind == ActionKind::click) a.target_id = element_at(s, *g.point);
        if (g.kind == ActionKind::type) {
          a.target_id = 3;
          a.value = g.value;
        }
        return format_action(a);
      });
    }
  }
  return {};
}

/// Replies that never contain an answer: every suite should score 0.0.
inline std::map<std::string, std::string> unparseable_table(omniparse::eval::Suite suite,
                                                            const omniparse::eval::SuiteOptions& opt) {
  using namespace omniparse::eval;
  const auto path = dataset(suite);
  const AnswerFn junk = [](std::size_t, const omniparse::ParsedScreen&) { return std::string("I am not sure what to do here."); };
  switch (suite) {
    case Suite::seeassign: return mock_table(load_seeassign(path).records, opt, junk);
    case Suite::screenspot: return mock_table(load_screenspot(path).records, opt, junk);
    case Suite::mind2web: return mock_table(load_mind2web(path).records, opt, junk);
    case Suite::aitw: return mock_table(load_aitw(path).records, opt, junk);
  }
  return {};
}

}  // namespace fixtures
