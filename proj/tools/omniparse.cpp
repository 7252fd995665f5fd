/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// omniparse command line: parse, eval, serve, export-dataset, version.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "omniparse/config.hpp"
#include "omniparse/export.hpp"
#include "omniparse/factory.hpp"
#include "omniparse/runner.hpp"
#include "omniparse/service.hpp"
#include "omniparse/version.hpp"

namespace fs = std::filesystem;
using namespace omniparse;

namespace {

AppConfig resolve_config(const std::string& flag) {
  std::string path = flag;
  if (path.empty())
    if (const char* env = std::getenv("OMNIPARSE_CONFIG")) path = env;
  if (path.empty()) return parse_config("", fs::current_path());
  return load_config(path);
}

int cmd_parse(const AppConfig& cfg, const std::string& image_path, const std::string& out_flag) {
  const fs::path out = out_flag.empty() ? fs::path(cfg.output.dir) : fs::path(out_flag);
  const Image image = load_image(image_path);
  const ParsedScreen screen = parse_screen(image, make_adapters(cfg), cfg.pipeline());
  fs::create_directories(out);
  const std::string stem = fs::path(image_path).stem().string();
  const fs::path json_path = out / (stem + ".parsed.json");
  const fs::path png_path = out / (stem + ".overlay.png");
  const std::string text = serialize(screen, cfg.output.timings);
  write_bytes(json_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  write_bytes(png_path, encode_png(screen.overlay));

  std::cout << screen.elements.size() << " elements -> " << json_path.string() << ", " << png_path.string() << "\n";
  for (const char* stage : {"detect", "ocr", "fuse", "caption", "semantics", "overlay"}) {
    if (auto it = screen.timings.find(stage); it != screen.timings.end())
      std::cout << "  " << stage << ": " << it->second << " ms\n";
  }
  return 0;
}

int cmd_eval(AppConfig cfg, const std::string& suite_name, const std::string& data, const std::string& llm_mode,
             const std::string& out_flag, bool no_semantics, const std::string& rescore_from) {
  const eval::Suite suite = eval::suite_from_string(suite_name);
  const fs::path out = out_flag.empty() ? fs::path(cfg.output.dir) : fs::path(out_flag);
  fs::create_directories(out);

  if (!rescore_from.empty()) {
    const auto report = eval::rescore(suite, data, rescore_from);
    eval::detail::write_report(out, report, cfg.eval.row_label);
    std::cout << eval::render_table(report, cfg.eval.row_label);
    return 0;
  }

  eval::SuiteOptions opt;
  opt.adapters = make_adapters(cfg);
  opt.pipeline = cfg.pipeline();
  opt.local_semantics = cfg.eval.local_semantics && !no_semantics;
  opt.concurrency = cfg.llm.concurrency;
  opt.max_tokens = cfg.llm.max_tokens;
  opt.temperature = cfg.llm.temperature;
  opt.out_dir = out;
  opt.row_label = cfg.eval.row_label;
  auto llm = make_llm(cfg, llm_mode.empty() ? cfg.llm.mode : llm_mode);
  const auto result = eval::run_suite(suite, data, opt, *llm);

  // Frozen config next to the report so the run can be reproduced.
  const std::string frozen = serialize_config(cfg);
  write_bytes(out / "config.toml", std::span(reinterpret_cast<const std::uint8_t*>(frozen.data()), frozen.size()));
  std::cout << eval::render_table(result.report, cfg.eval.row_label);
  if (result.failures > 0)
    std::cerr << result.failures << " record(s) failed; see " << (out / "transcript.jsonl").string() << "\n";
  return 0;
}

ParseService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const AppConfig& cfg, const std::string& bind_addr) {
  const auto colon = bind_addr.rfind(':');
  if (colon == std::string::npos) throw InvalidArgument("--bind expects host:port, got '" + bind_addr + "'");
  const std::string host = bind_addr.substr(0, colon);
  const int port = std::stoi(bind_addr.substr(colon + 1));
  ParseService service(cfg, make_adapters(cfg));
  const int bound = service.bind(host, port);
  if (bound < 0) throw Error("cannot bind " + bind_addr);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "[serve] listening on " << host << ":" << bound << std::endl;
  service.listen();
  g_service = nullptr;
  std::cerr << "[serve] stopped" << std::endl;
  return 0;
}

int cmd_export(const std::string& parsed_dir, const std::string& format, const std::string& out,
               const std::string& images) {
  const auto summary = export_dataset(parsed_dir, export_format_from_string(format), out, images);
  for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << summary.records << " records, " << summary.files_written << " files -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"omniparse: screen parsing and GUI-agent evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "config file (default: $OMNIPARSE_CONFIG)");

  std::string image, out;
  auto* parse = app.add_subcommand("parse", "parse one screenshot");
  parse->add_option("image", image, "PNG or JPEG screenshot")->required();
  parse->add_option("--out", out, "output directory");

  std::string suite, data, llm_mode, rescore_from;
  bool no_semantics = false;
  auto* ev = app.add_subcommand("eval", "run an evaluation suite");
  ev->add_option("--suite", suite)->required()->check(CLI::IsMember({"seeassign", "screenspot", "mind2web", "aitw"}));
  ev->add_option("--data", data, "dataset JSONL")->required();
  ev->add_option("--llm", llm_mode)->check(CLI::IsMember({"mock", "live"}));
  ev->add_option("--out", out, "output directory");
  ev->add_flag("--no-semantics", no_semantics, "leave local semantics out of prompts");
  ev->add_option("--rescore", rescore_from, "recompute the report from a saved transcript");

  std::string bind_addr = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "run the HTTP parse endpoint");
  serve->add_option("--bind", bind_addr, "host:port");

  std::string parsed_dir, format, images;
  auto* exp = app.add_subcommand("export-dataset", "export training data from parsed screens");
  exp->add_option("parsed_dir", parsed_dir)->required();
  exp->add_option("--format", format)->required()->check(CLI::IsMember({"detection_yolo", "icon_caption_jsonl"}));
  exp->add_option("--out", out)->required();
  exp->add_option("--images", images, "directory with source screenshots (default: parsed_dir)");

  auto* version = app.add_subcommand("version", "print the version");

  CLI11_PARSE(app, argc, argv);

  try {
    if (version->parsed()) {
      std::cout << "omniparse " << kVersion << "\n";
      return 0;
    }
    if (exp->parsed()) return cmd_export(parsed_dir, format, out, images);
    const AppConfig cfg = resolve_config(config_path);
    if (parse->parsed()) return cmd_parse(cfg, image, out);
    if (ev->parsed()) return cmd_eval(cfg, suite, data, llm_mode, out, no_semantics, rescore_from);
    if (serve->parsed()) return cmd_serve(cfg, bind_addr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
