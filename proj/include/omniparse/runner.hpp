/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// End-to-end suite runner: parse each screenshot, prompt the model, parse its
// answer, score. Every record's outcome is written to transcript.jsonl so a
// report can be recomputed later without the model.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "omniparse/eval.hpp"
#include "omniparse/image.hpp"
#include "omniparse/llm_client.hpp"
#include "omniparse/pipeline.hpp"
#include "omniparse/prompting.hpp"

namespace omniparse::eval {

struct SuiteOptions {
  Adapters adapters;
  PipelineConfig pipeline;
  /// Include the local-semantics block in the prompt.
  bool local_semantics = true;
  int concurrency = 4;
  int max_tokens = 1024;
  double temperature = 0.0;
  /// Empty: nothing is written.
  std::filesystem::path out_dir;
  std::string row_label = "agent";
};

/// What happened for one record. `prediction` is null when the model's
/// answer could not be used.
struct RecordOutcome {
  std::size_t index = 0;
  std::string prompt_digest;
  std::string response;
  std::string error;
  nlohmann::ordered_json prediction;
};

struct RunResult {
  MetricsReport report;
  std::vector<RecordOutcome> outcomes;
  int failures = 0;
};

namespace detail {

inline nlohmann::ordered_json opt_box(const std::optional<BBox>& b) {
  return b ? box_to_json(*b) : nlohmann::ordered_json(nullptr);
}

inline std::optional<BBox> box_or_null(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return omniparse::detail::box_from(j);
}

inline std::optional<BBox> element_box(const ParsedScreen& screen, int id) {
  if (id < 0 || id >= static_cast<int>(screen.elements.size())) return std::nullopt;
  return screen.elements[static_cast<std::size_t>(id)].bbox;
}

class ImageCache {
 public:
  Image get(const std::string& path, const std::string& id) {
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(path);
      if (it != cache_.end()) return Image{id, it->second};
    }
    Image img = load_image(path, id);
    std::lock_guard lock(mutex_);
    cache_.emplace(path, img.pixels);
    return img;
  }

 private:
  std::mutex mutex_;
  std::map<std::string, cv::Mat> cache_;
};

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads; rethrows the
/// first exception after all workers stop.
template <class F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::atomic<bool> stop{false};
  auto work = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> threads;
  for (int t = 1; t < count; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Sends the prompt with the overlay and returns the raw text. Model-side
/// failures (timeouts, rate limits) are recorded, not thrown; bad credentials
/// and mock misses (a stale fixture) abort the run.
inline bool ask(LlmClient& llm, const SuiteOptions& opt, const std::string& prompt, const cv::Mat& overlay,
                RecordOutcome& out) {
  ChatRequest req;
  req.user_text = prompt;
  req.images.push_back(overlay);
  req.max_tokens = opt.max_tokens;
  req.temperature = opt.temperature;
  out.prompt_digest = request_digest(req);
  try {
    out.response = llm.complete(req).text;
    return true;
  } catch (const AuthError&) {
    throw;
  } catch (const MockMiss&) {
    throw;
  } catch (const Error& e) {
    out.error = e.what();
    return false;
  }
}

template <class Record>
struct SuiteTraits;

template <>
struct SuiteTraits<SeeAssignTask> {
  static constexpr Suite suite = Suite::seeassign;
  using Prediction = std::optional<int>;

  static std::string prompt(const SeeAssignTask& t, const ParsedScreen& s, const SuiteOptions& o) {
    return build_seeassign_prompt({t.task_text, t.platform},
                                  o.local_semantics ? std::optional(s.semantics_block) : std::nullopt);
  }
  static nlohmann::ordered_json predict(const SeeAssignTask&, const ParsedScreen&, const std::string& response) {
    return {{"box_id", parse_box_id_response(response)}};
  }
  static Prediction decode(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return j.at("box_id").get<int>();
  }
  static MetricsReport score(const std::vector<SeeAssignTask>& r, const std::vector<Prediction>& p) {
    return score_seeassign(r, p);
  }
};

template <>
struct SuiteTraits<ScreenSpotRecord> {
  static constexpr Suite suite = Suite::screenspot;
  using Prediction = std::optional<BBox>;

  static std::string prompt(const ScreenSpotRecord& r, const ParsedScreen& s, const SuiteOptions& o) {
    return build_seeassign_prompt({r.instruction, r.platform},
                                  o.local_semantics ? std::optional(s.semantics_block) : std::nullopt);
  }
  static nlohmann::ordered_json predict(const ScreenSpotRecord&, const ParsedScreen& s, const std::string& response) {
    const int id = parse_box_id_response(response);
    return {{"box_id", id}, {"box", opt_box(element_box(s, id))}};
  }
  static Prediction decode(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return box_or_null(j.at("box"));
  }
  static MetricsReport score(const std::vector<ScreenSpotRecord>& r, const std::vector<Prediction>& p) {
    return score_screenspot(r, p);
  }
};

template <class Step, ActionSpace Space>
struct AgentTraits {
  using Prediction = std::optional<StepPrediction>;

  static nlohmann::ordered_json predict_action(const ParsedScreen& s, const std::string& response) {
    const AgentAction a = parse_action_response(response, Space);
    nlohmann::ordered_json j{{"action", format_action(a)},
                             {"box", opt_box(a.target_id ? element_box(s, *a.target_id) : std::nullopt)}};
    if constexpr (Space == ActionSpace::aitw) {
      auto boxes = nlohmann::ordered_json::array();
      for (const auto& e : s.elements) boxes.push_back(box_to_json(e.bbox));
      j["screen_boxes"] = boxes;
    }
    return j;
  }
  static Prediction decode(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    StepPrediction p;
    p.action = parse_action_response(j.at("action").get<std::string>(), Space);
    p.element = box_or_null(j.at("box"));
    if (j.contains("screen_boxes"))
      for (const auto& b : j["screen_boxes"]) p.screen_elements.push_back(omniparse::detail::box_from(b));
    return p;
  }
};

template <>
struct SuiteTraits<M2WStep> : AgentTraits<M2WStep, ActionSpace::mind2web> {
  static constexpr Suite suite = Suite::mind2web;

  static std::string prompt(const M2WStep& st, const ParsedScreen& s, const SuiteOptions&) {
    return build_agent_prompt({st.task_text, Platform::web}, s, st.history, ActionSpace::mind2web);
  }
  static nlohmann::ordered_json predict(const M2WStep&, const ParsedScreen& s, const std::string& response) {
    return predict_action(s, response);
  }
  static MetricsReport score(const std::vector<M2WStep>& r, const std::vector<Prediction>& p) {
    return score_mind2web(r, p);
  }
};

template <>
struct SuiteTraits<AitwStep> : AgentTraits<AitwStep, ActionSpace::aitw> {
  static constexpr Suite suite = Suite::aitw;

  static std::string prompt(const AitwStep& st, const ParsedScreen& s, const SuiteOptions&) {
    return build_agent_prompt({st.instruction, Platform::mobile}, s, st.history, ActionSpace::aitw);
  }
  static nlohmann::ordered_json predict(const AitwStep&, const ParsedScreen& s, const std::string& response) {
    return predict_action(s, response);
  }
  static MetricsReport score(const std::vector<AitwStep>& r, const std::vector<Prediction>& p) {
    return score_aitw(r, p);
  }
};

inline nlohmann::ordered_json outcome_json(const RecordOutcome& o) {
  nlohmann::ordered_json j;
  j["index"] = o.index;
  j["prompt_digest"] = o.prompt_digest;
  j["response"] = o.response;
  j["error"] = o.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(o.error);
  j["prediction"] = o.prediction;
  return j;
}

template <class Record>
MetricsReport score_outcomes(const std::vector<Record>& records, const std::vector<nlohmann::json>& predictions) {
  using Traits = SuiteTraits<Record>;
  std::vector<typename Traits::Prediction> preds;
  preds.reserve(predictions.size());
  for (const auto& p : predictions) preds.push_back(Traits::decode(p));
  return Traits::score(records, preds);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline void write_report(const std::filesystem::path& dir, const MetricsReport& report, const std::string& label) {
  write_text(dir / "report.json", to_json(report).dump(2) + "\n");
  write_text(dir / "report.txt", render_table(report, label));
}

template <class Record>
RunResult run_records(const std::vector<Record>& records, const SuiteOptions& opt, LlmClient& llm) {
  using Traits = SuiteTraits<Record>;
  ImageCache images;
  std::vector<RecordOutcome> outcomes(records.size());
  std::vector<Record> scored = records;

  parallel_for(records.size(), opt.concurrency, [&](std::size_t i) {
    const Record& rec = records[i];
    RecordOutcome& out = outcomes[i];
    out.index = i;
    const Image img = images.get(rec.image, rec.image_id);
    if constexpr (std::is_same_v<Record, AitwStep>) {
      if (scored[i].width <= 0) scored[i].width = img.width();
      if (scored[i].height <= 0) scored[i].height = img.height();
    }
    const ParsedScreen screen = parse_screen(img, opt.adapters, opt.pipeline);
    if (!ask(llm, opt, Traits::prompt(rec, screen, opt), screen.overlay, out)) return;
    try {
      out.prediction = Traits::predict(rec, screen, out.response);
    } catch (const UnparseableResponse& e) {
      out.error = e.what();
    } catch (const InvalidAction& e) {
      out.error = e.what();
    }
  });

  RunResult result;
  std::vector<nlohmann::json> preds;
  for (const auto& o : outcomes) {
    preds.emplace_back(o.prediction);
    if (o.prediction.is_null()) ++result.failures;
  }
  result.report = score_outcomes(scored, preds);
  result.outcomes = std::move(outcomes);

  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream tr(opt.out_dir / "transcript.jsonl", std::ios::trunc);
    tr << nlohmann::ordered_json{{"suite", to_string(Traits::suite)}, {"records", records.size()}}.dump() << "\n";
    for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
      auto j = outcome_json(result.outcomes[i]);
      if constexpr (std::is_same_v<Record, AitwStep>) j["screen"] = {{"width", scored[i].width}, {"height", scored[i].height}};
      tr << j.dump() << "\n";
    }
    write_report(opt.out_dir, result.report, opt.row_label);
  }
  return result;
}

}  // namespace detail

/// Loads the dataset for `suite` and runs it end to end.
inline RunResult run_suite(Suite suite, const std::filesystem::path& dataset, const SuiteOptions& opt, LlmClient& llm) {
  if (!std::filesystem::is_regular_file(dataset)) throw DatasetFormatError("dataset not found: " + dataset.string());
  switch (suite) {
    case Suite::seeassign: return detail::run_records(load_seeassign(dataset).records, opt, llm);
    case Suite::screenspot: return detail::run_records(load_screenspot(dataset).records, opt, llm);
    case Suite::mind2web: return detail::run_records(load_mind2web(dataset).records, opt, llm);
    case Suite::aitw: return detail::run_records(load_aitw(dataset).records, opt, llm);
  }
  throw InvalidArgument("unknown suite");
}

/// Recomputes a report from a saved transcript without touching any model.
inline MetricsReport rescore(Suite suite, const std::filesystem::path& dataset, const std::filesystem::path& transcript) {
  std::ifstream in(transcript);
  if (!in) throw DatasetFormatError("cannot read transcript " + transcript.string());
  std::vector<nlohmann::json> preds;
  std::vector<std::pair<int, int>> screens;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (header) {
      header = false;
      if (j.value("suite", "") != to_string(suite))
        throw DatasetFormatError("transcript " + transcript.string() + " is not for suite " + std::string(to_string(suite)));
      continue;
    }
    preds.push_back(j.at("prediction"));
    if (j.contains("screen")) screens.emplace_back(j["screen"]["width"].get<int>(), j["screen"]["height"].get<int>());
  }
  auto check = [&](std::size_t n) {
    if (n != preds.size()) throw DatasetFormatError("transcript does not match dataset record count");
  };
  switch (suite) {
    case Suite::seeassign: {
      auto r = load_seeassign(dataset).records;
      check(r.size());
      return detail::score_outcomes(r, preds);
    }
    case Suite::screenspot: {
      auto r = load_screenspot(dataset).records;
      check(r.size());
      return detail::score_outcomes(r, preds);
    }
    case Suite::mind2web: {
      auto r = load_mind2web(dataset).records;
      check(r.size());
      return detail::score_outcomes(r, preds);
    }
    case Suite::aitw: {
      auto r = load_aitw(dataset).records;
      check(r.size());
      for (std::size_t i = 0; i < r.size() && i < screens.size(); ++i) {
        if (r[i].width <= 0) r[i].width = screens[i].first;
        if (r[i].height <= 0) r[i].height = screens[i].second;
      }
      return detail::score_outcomes(r, preds);
    }
  }
  throw InvalidArgument("unknown suite");
}

}  // namespace omniparse::eval
