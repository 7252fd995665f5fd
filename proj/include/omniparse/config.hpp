/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Application configuration: a small TOML subset (sections, string / number /
// boolean scalars, arrays of strings, # comments) with environment overrides.
//
// Every key can be overridden by OMNIPARSE_<SECTION>_<KEY>, e.g.
// OMNIPARSE_DETECTOR_CONFIDENCE_THRESHOLD=0.2. The llm endpoint, key and
// model additionally honour LLM_ENDPOINT, LLM_API_KEY and LLM_MODEL.
// Relative paths are resolved against the config file's directory.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "omniparse/errors.hpp"
#include "omniparse/overlay.hpp"
#include "omniparse/pipeline.hpp"

namespace omniparse {

struct AppConfig {
  struct Detector {
    std::string model_path;
    std::string fixture;
    double confidence_threshold = 0.05;
    double nms_iou = 0.5;
    int max_detections = 200;
    int input_size = 640;
    friend bool operator==(const Detector&, const Detector&) = default;
  } detector;

  struct Ocr {
    std::string engine_cmd;
    std::string fixture;
    friend bool operator==(const Ocr&, const Ocr&) = default;
  } ocr;

  struct CaptionerCfg {
    std::string endpoint;
    std::string fixture;
    std::string prompt{kDefaultCaptionPrompt};
    friend bool operator==(const CaptionerCfg&, const CaptionerCfg&) = default;
  } captioner;

  struct Fusion {
    double overlap_threshold = kDefaultOverlapThreshold;
    friend bool operator==(const Fusion&, const Fusion&) = default;
  } fusion;

  LabelStyle overlay;

  struct Llm {
    std::string mode = "mock";  // mock | live
    std::string endpoint;
    std::string api_key;
    std::string model;
    std::string mock_fixture;
    std::string transcript;
    int concurrency = 4;
    int max_tokens = 1024;
    double temperature = 0.0;
    int timeout_s = 120;
    friend bool operator==(const Llm&, const Llm&) = default;
  } llm;

  struct Eval {
    bool local_semantics = true;
    std::string row_label = "OmniParser";
    friend bool operator==(const Eval&, const Eval&) = default;
  } eval;

  struct Output {
    std::string dir = "out";
    /// Write stage timings into parsed.json (makes output run-dependent).
    bool timings = true;
    friend bool operator==(const Output&, const Output&) = default;
  } output;

  struct Service {
    long long max_body_bytes = 16LL * 1024 * 1024;
    int overlay_cache = 64;
    friend bool operator==(const Service&, const Service&) = default;
  } service;

  PipelineConfig pipeline() const {
    PipelineConfig p;
    p.detector = {detector.confidence_threshold, detector.nms_iou, detector.max_detections};
    p.overlap_threshold = fusion.overlap_threshold;
    p.style = overlay;
    p.caption_prompt = captioner.prompt;
    return p;
  }

  friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

namespace config_detail {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

inline std::string parse_string(const std::string& src, std::size_t& pos, const std::string& where) {
  // src[pos] == '"'
  std::string out;
  for (++pos; pos < src.size(); ++pos) {
    char c = src[pos];
    if (c == '"') {
      ++pos;
      return out;
    }
    if (c == '\\' && pos + 1 < src.size()) {
      char e = src[++pos];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: throw ConfigError(where + ": bad escape \\" + std::string(1, e));
      }
    } else {
      out += c;
    }
  }
  throw ConfigError(where + ": unterminated string");
}

inline void skip_ws(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
}

inline void expect_end(const std::string& s, std::size_t pos, const std::string& where) {
  skip_ws(s, pos);
  if (pos < s.size() && s[pos] != '#') throw ConfigError(where + ": unexpected trailing text");
}

inline Value parse_value(const std::string& raw, const std::string& where) {
  std::size_t pos = 0;
  skip_ws(raw, pos);
  if (pos >= raw.size()) throw ConfigError(where + ": missing value");
  if (raw[pos] == '"') {
    auto s = parse_string(raw, pos, where);
    expect_end(raw, pos, where);
    return s;
  }
  if (raw[pos] == '[') {
    std::vector<std::string> items;
    ++pos;
    for (;;) {
      skip_ws(raw, pos);
      if (pos >= raw.size()) throw ConfigError(where + ": unterminated array");
      if (raw[pos] == ']') {
        ++pos;
        break;
      }
      if (raw[pos] != '"') throw ConfigError(where + ": arrays may only hold strings");
      items.push_back(parse_string(raw, pos, where));
      skip_ws(raw, pos);
      if (pos < raw.size() && raw[pos] == ',') ++pos;
    }
    expect_end(raw, pos, where);
    return items;
  }
  std::size_t end = raw.find('#', pos);
  std::string word = raw.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
  while (!word.empty() && std::isspace(static_cast<unsigned char>(word.back()))) word.pop_back();
  if (word == "true") return true;
  if (word == "false") return false;
  char* stop = nullptr;
  const double d = std::strtod(word.c_str(), &stop);
  if (word.empty() || *stop != '\0') throw ConfigError(where + ": cannot parse value '" + word + "'");
  return d;
}

/// Value from an environment string: same syntax as the file, but a bare
/// word that is not a number or boolean is taken as a string.
inline Value parse_env_value(const std::string& raw, const std::string& where) {
  try {
    return parse_value(raw, where);
  } catch (const ConfigError&) {
    return raw;
  }
}

struct Binding {
  std::function<void(const Value&, const std::string&)> set;
  std::function<std::string()> dump;
};

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline Binding bind(std::string& field) {
  return {[&field](const Value& v, const std::string& where) {
            if (auto* s = std::get_if<std::string>(&v)) {
              field = *s;
            } else {
              throw ConfigError(where + ": expected a string");
            }
          },
          [&field] { return quote(field); }};
}

inline Binding bind(double& field) {
  return {[&field](const Value& v, const std::string& where) {
            if (auto* d = std::get_if<double>(&v)) {
              field = *d;
            } else {
              throw ConfigError(where + ": expected a number");
            }
          },
          [&field] { return fmt_double(field); }};
}

template <class Int>
  requires std::is_integral_v<Int> && (!std::is_same_v<Int, bool>)
inline Binding bind(Int& field) {
  return {[&field](const Value& v, const std::string& where) {
            auto* d = std::get_if<double>(&v);
            if (!d || *d != static_cast<double>(static_cast<Int>(*d))) throw ConfigError(where + ": expected an integer");
            field = static_cast<Int>(*d);
          },
          [&field] { return std::to_string(field); }};
}

inline Binding bind(bool& field) {
  return {[&field](const Value& v, const std::string& where) {
            if (auto* b = std::get_if<bool>(&v)) {
              field = *b;
            } else {
              throw ConfigError(where + ": expected true or false");
            }
          },
          [&field] { return std::string(field ? "true" : "false"); }};
}

inline std::string rgb_hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

inline Binding bind(std::vector<Rgb>& field) {
  return {[&field](const Value& v, const std::string& where) {
            auto* items = std::get_if<std::vector<std::string>>(&v);
            if (!items) throw ConfigError(where + ": expected an array of \"#rrggbb\" strings");
            std::vector<Rgb> out;
            for (const auto& s : *items) {
              unsigned r, g, b;
              if (s.size() != 7 || std::sscanf(s.c_str(), "#%2x%2x%2x", &r, &g, &b) != 3)
                throw ConfigError(where + ": bad colour '" + s + "'");
              out.push_back({static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
            }
            field = std::move(out);
          },
          [&field] {
            std::string s = "[";
            for (std::size_t i = 0; i < field.size(); ++i) s += (i ? ", " : "") + quote(rgb_hex(field[i]));
            return s + "]";
          }};
}

using Schema = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Binding>>>>;

inline Schema schema(AppConfig& c) {
  return {
      {"detector",
       {{"model_path", bind(c.detector.model_path)},
        {"fixture", bind(c.detector.fixture)},
        {"confidence_threshold", bind(c.detector.confidence_threshold)},
        {"nms_iou", bind(c.detector.nms_iou)},
        {"max_detections", bind(c.detector.max_detections)},
        {"input_size", bind(c.detector.input_size)}}},
      {"ocr", {{"engine_cmd", bind(c.ocr.engine_cmd)}, {"fixture", bind(c.ocr.fixture)}}},
      {"captioner",
       {{"endpoint", bind(c.captioner.endpoint)},
        {"fixture", bind(c.captioner.fixture)},
        {"prompt", bind(c.captioner.prompt)}}},
      {"fusion", {{"overlap_threshold", bind(c.fusion.overlap_threshold)}}},
      {"overlay",
       {{"font_size", bind(c.overlay.font_size)},
        {"label_pad", bind(c.overlay.label_pad)},
        {"box_stroke", bind(c.overlay.box_stroke)},
        {"palette", bind(c.overlay.palette)}}},
      {"llm",
       {{"mode", bind(c.llm.mode)},
        {"endpoint", bind(c.llm.endpoint)},
        {"api_key", bind(c.llm.api_key)},
        {"model", bind(c.llm.model)},
        {"mock_fixture", bind(c.llm.mock_fixture)},
        {"transcript", bind(c.llm.transcript)},
        {"concurrency", bind(c.llm.concurrency)},
        {"max_tokens", bind(c.llm.max_tokens)},
        {"temperature", bind(c.llm.temperature)},
        {"timeout_s", bind(c.llm.timeout_s)}}},
      {"eval", {{"local_semantics", bind(c.eval.local_semantics)}, {"row_label", bind(c.eval.row_label)}}},
      {"output", {{"dir", bind(c.output.dir)}, {"timings", bind(c.output.timings)}}},
      {"service", {{"max_body_bytes", bind(c.service.max_body_bytes)}, {"overlay_cache", bind(c.service.overlay_cache)}}},
  };
}

inline Binding* find(Schema& s, const std::string& section, const std::string& key) {
  for (auto& [name, keys] : s)
    if (name == section)
      for (auto& [k, b] : keys)
        if (k == key) return &b;
  return nullptr;
}

inline std::string upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace config_detail

inline void validate(const AppConfig& c) {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0,1]");
  };
  unit(c.detector.confidence_threshold, "detector.confidence_threshold");
  unit(c.detector.nms_iou, "detector.nms_iou");
  if (c.detector.max_detections < 1) throw ConfigError("detector.max_detections must be >= 1");
  if (c.detector.input_size < 32) throw ConfigError("detector.input_size must be >= 32");
  if (!(c.fusion.overlap_threshold > 0.0 && c.fusion.overlap_threshold <= 1.0))
    throw ConfigError("fusion.overlap_threshold must be in (0,1]");
  try {
    c.overlay.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.message());
  }
  if (c.llm.mode != "mock" && c.llm.mode != "live") throw ConfigError("llm.mode must be \"mock\" or \"live\"");
  if (c.llm.concurrency < 1) throw ConfigError("llm.concurrency must be >= 1");
  if (c.llm.max_tokens < 1) throw ConfigError("llm.max_tokens must be >= 1");
  if (c.llm.temperature < 0) throw ConfigError("llm.temperature must be >= 0");
  if (c.service.max_body_bytes < 1) throw ConfigError("service.max_body_bytes must be positive");
  if (c.service.overlay_cache < 1) throw ConfigError("service.overlay_cache must be >= 1");
}

/// Parses config text. `base` resolves relative paths; unknown sections or
/// keys are errors.
inline AppConfig parse_config(const std::string& text, const std::filesystem::path& base = {},
                              const std::string& origin = "<config>") {
  AppConfig cfg;
  auto sch = config_detail::schema(cfg);
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '[') {
      const auto close = t.find(']');
      if (close == std::string::npos) throw ConfigError(where + ": bad section header");
      section = trim(t.substr(1, close - 1));
      config_detail::expect_end(t, close + 1, where);
      bool known = false;
      for (const auto& [name, keys] : sch) known = known || name == section;
      if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
    auto* b = config_detail::find(sch, section, key);
    if (!b) throw ConfigError(where + ": unknown key " + section + "." + key);
    b->set(config_detail::parse_value(t.substr(eq + 1), where), where);
  }

  for (auto& [name, keys] : sch) {
    for (auto& [key, b] : keys) {
      const std::string var = "OMNIPARSE_" + config_detail::upper(name) + "_" + config_detail::upper(key);
      if (const char* v = std::getenv(var.c_str())) b.set(config_detail::parse_env_value(v, var), var);
    }
  }
  for (auto [var, field] : {std::pair{"LLM_ENDPOINT", &cfg.llm.endpoint}, std::pair{"LLM_API_KEY", &cfg.llm.api_key},
                            std::pair{"LLM_MODEL", &cfg.llm.model}}) {
    if (const char* v = std::getenv(var); v && field->empty()) *field = v;
  }

  if (!base.empty()) {
    for (std::string* p : {&cfg.detector.model_path, &cfg.detector.fixture, &cfg.ocr.fixture, &cfg.captioner.fixture,
                           &cfg.llm.mock_fixture, &cfg.llm.transcript, &cfg.output.dir}) {
      if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
  }
  validate(cfg);
  return cfg;
}

/// Checks that every referenced input file exists; creates the output dir.
inline void check_paths(const AppConfig& cfg) {
  for (const auto& [name, p] : {std::pair{"detector.model_path", cfg.detector.model_path},
                                std::pair{"detector.fixture", cfg.detector.fixture},
                                std::pair{"ocr.fixture", cfg.ocr.fixture},
                                std::pair{"captioner.fixture", cfg.captioner.fixture},
                                std::pair{"llm.mock_fixture", cfg.llm.mock_fixture}}) {
    if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError(std::string(name) + " does not exist: " + p);
  }
  if (!cfg.output.dir.empty()) std::filesystem::create_directories(cfg.output.dir);
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto cfg = parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                          path.string());
  check_paths(cfg);
  return cfg;
}

/// Serializes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const AppConfig& c) {
  AppConfig copy = c;
  auto sch = config_detail::schema(copy);
  std::string out;
  for (auto& [name, keys] : sch) {
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    for (auto& [key, b] : keys) out += key + " = " + b.dump() + "\n";
  }
  return out;
}

}  // namespace omniparse
