/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Config files, dataset export, the command-line tool and the HTTP service.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "omniparse/export.hpp"
#include "support/fixtures.hpp"
#include "support/process.hpp"

using namespace omniparse;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("omniparse_cli_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string lines_of(const std::filesystem::path& p) { return fixtures::read_text(p); }

}  // namespace

// -- config ------------------------------------------------------------------------------------

TEST(Config, DefaultsAndRoundTrip) {
  const auto defaults = parse_config("");
  EXPECT_DOUBLE_EQ(defaults.fusion.overlap_threshold, 0.9);
  EXPECT_EQ(defaults.llm.mode, "mock");
  EXPECT_EQ(parse_config(serialize_config(defaults)), defaults);

  auto custom = parse_config(
      "[fusion]\noverlap_threshold = 0.75  # tighter\n[overlay]\nfont_size = 24\npalette = [\"#102030\", \"#ffffff\"]\n"
      "[eval]\nlocal_semantics = false\nrow_label = \"quote \\\" me\"\n");
  EXPECT_DOUBLE_EQ(custom.fusion.overlap_threshold, 0.75);
  EXPECT_EQ(custom.overlay.palette.size(), 2u);
  EXPECT_EQ(custom.overlay.palette[0], (Rgb{0x10, 0x20, 0x30}));
  EXPECT_FALSE(custom.eval.local_semantics);
  EXPECT_EQ(custom.eval.row_label, "quote \" me");
  EXPECT_EQ(parse_config(serialize_config(custom)), custom);
}

TEST(Config, RejectsUnknownAndInvalid) {
  EXPECT_THROW(parse_config("[fusion]\noverlap = 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[nope]\n"), ConfigError);
  EXPECT_THROW(parse_config("orphan = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[fusion]\noverlap_threshold = \"high\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[fusion]\noverlap_threshold = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("[llm]\nconcurrency = 0\n"), ConfigError);
  EXPECT_THROW(load_config("/no/such/config.toml"), ConfigError);
  try {
    parse_config("[ocr]\n\nengine = \"x\"\n", {}, "my.toml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("my.toml:3"), std::string::npos) << e.what();
  }
}

TEST(Config, EnvironmentOverridesFile) {
  ::setenv("OMNIPARSE_FUSION_OVERLAP_THRESHOLD", "0.6", 1);
  ::setenv("OMNIPARSE_EVAL_ROW_LABEL", "from env", 1);
  const auto cfg = parse_config("[fusion]\noverlap_threshold = 0.8\n");
  ::unsetenv("OMNIPARSE_FUSION_OVERLAP_THRESHOLD");
  ::unsetenv("OMNIPARSE_EVAL_ROW_LABEL");
  EXPECT_DOUBLE_EQ(cfg.fusion.overlap_threshold, 0.6);
  EXPECT_EQ(cfg.eval.row_label, "from env");
}

TEST(Config, RelativePathsResolveAgainstTheFile) {
  const auto cfg = fixtures::config();
  EXPECT_TRUE(std::filesystem::path(cfg.detector.fixture).is_absolute());
  EXPECT_TRUE(std::filesystem::exists(cfg.detector.fixture));
  EXPECT_FALSE(cfg.output.timings);
}

// -- export ------------------------------------------------------------------------------------------

TEST(Export, YoloLineForASimpleScreen) {
  EXPECT_EQ(yolo_line({10, 10, 20, 20}, 100, 100), "0 0.200000 0.200000 0.200000 0.200000");

  const auto in = temp_dir("yolo_in"), out = temp_dir("yolo_out");
  ParsedScreen s;
  s.image_id = "tiny";
  s.width = 100;
  s.height = 100;
  s.elements = {{0, {10, 10, 20, 20}, ElementKind::icon, "A gear.", Source::icon_detector, 0.9}};
  write_file(in / "tiny.parsed.json", serialize(s, false));
  write_file(in / "harvest.jsonl",
             R"({"url": "http://x", "screenshot": "shots/page1.png", "viewport": {"width": 200, "height": 100}, "boxes": [{"x": 0, "y": 0, "w": 100, "h": 50}]})"
             "\n");
  const auto summary = export_dataset(in, ExportFormat::detection_yolo, out);
  EXPECT_EQ(summary.files_written, 2);
  EXPECT_EQ(lines_of(out / "tiny.txt"), "0 0.200000 0.200000 0.200000 0.200000\n");
  EXPECT_EQ(lines_of(out / "page1.txt"), "0 0.250000 0.250000 0.500000 0.500000\n");
}

TEST(Export, EmptyAndMalformedInputs) {
  const auto empty = temp_dir("empty"), out = temp_dir("empty_out");
  const auto summary = export_dataset(empty, ExportFormat::detection_yolo, out);
  EXPECT_EQ(summary.files_written, 0);
  ASSERT_EQ(summary.warnings.size(), 1u);

  const auto bad = temp_dir("bad");
  write_file(bad / "broken.parsed.json", "{\"schema_version\": 1, \"elements\": [");
  EXPECT_THROW(export_dataset(bad, ExportFormat::detection_yolo, out), DatasetFormatError);

  const auto harvest = temp_dir("bad_harvest");
  write_file(harvest / "h.jsonl",
             R"({"screenshot": "a.png", "viewport": {"width": 10, "height": 10}, "boxes": [{"x": 5, "y": 5, "w": 10, "h": 1}]})"
             "\n");
  EXPECT_THROW(export_dataset(harvest, ExportFormat::detection_yolo, out), DatasetFormatError);
  EXPECT_THROW(export_format_from_string("coco"), InvalidArgument);
}

TEST(Export, IconCaptionsFromGoldenScreen) {
  const auto in = temp_dir("captions_in"), out = temp_dir("captions_out");
  std::filesystem::copy_file(fixtures::golden("settings.parsed.json"), in / "settings.parsed.json");
  const auto summary = export_dataset(in, ExportFormat::icon_caption_jsonl, out, fixtures::data_dir() / "screens");
  EXPECT_EQ(summary.records, 9);  // every icon on the settings screen
  std::ifstream jsonl(out / "icon_captions.jsonl");
  std::string line;
  int sentinels = 0, n = 0;
  while (std::getline(jsonl, line)) {
    const auto j = nlohmann::json::parse(line);
    ++n;
    EXPECT_TRUE(std::filesystem::exists(out / j["crop_path"].get<std::string>()));
    if (j["description"] == kNotAnIcon) ++sentinels;
  }
  EXPECT_EQ(n, 9);
  EXPECT_EQ(sentinels, 1);  // the decorative dot
  EXPECT_EQ(normalize_caption("  This is not an icon. "), "this is not an icon");
  EXPECT_EQ(normalize_caption("Opens settings."), "Opens settings.");

  // No source image: a clear error rather than a silent skip.
  EXPECT_THROW(export_dataset(in, ExportFormat::icon_caption_jsonl, out), DatasetFormatError);
}

// -- command-line tool ------------------------------------------------------------------------------

TEST(Cli, ParseMatchesGoldenBytes) {
  const auto out = temp_dir("parse");
  const auto config = (fixtures::data_dir() / "fixture.toml").string();
  for (const char* name : {"settings", "login", "grid", "blank"}) {
    const auto r = fixtures::run_cli({"--config", config, "parse", fixtures::screen(name).string(), "--out", out.string()});
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const std::string stem(name);
    EXPECT_EQ(fixtures::read_text(out / (stem + ".parsed.json")), fixtures::read_text(fixtures::golden(stem + ".parsed.json")));
    EXPECT_EQ(fixtures::read_text(out / (stem + ".overlay.png")), fixtures::read_text(fixtures::golden(stem + ".overlay.png")));
  }
}

TEST(Cli, ConfigFromEnvironment) {
  const auto out = temp_dir("parse_env");
  ::setenv("OMNIPARSE_CONFIG", (fixtures::data_dir() / "fixture.toml").c_str(), 1);
  const auto r = fixtures::run_cli({"parse", fixtures::screen("login").string(), "--out", out.string()});
  ::unsetenv("OMNIPARSE_CONFIG");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(fixtures::read_text(out / "login.parsed.json"), fixtures::read_text(fixtures::golden("login.parsed.json")));
}

TEST(Cli, FailuresExitNonZeroAndNameTheProblem) {
  const auto config = (fixtures::data_dir() / "fixture.toml").string();
  auto r = fixtures::run_cli({"--config", config, "parse", "/no/such/screen.png"});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("/no/such/screen.png"), std::string::npos) << r.output;

  r = fixtures::run_cli({"--config", "/no/such/config.toml", "parse", fixtures::screen("blank").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("/no/such/config.toml"), std::string::npos) << r.output;

  // No adapters configured at all.
  const auto dir = temp_dir("bare");
  write_file(dir / "bare.toml", "[output]\ndir = \"" + (dir / "out").string() + "\"\n");
  r = fixtures::run_cli({"--config", (dir / "bare.toml").string(), "parse", fixtures::screen("blank").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("detector"), std::string::npos) << r.output;

  r = fixtures::run_cli({"version"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.output, "omniparse 0.1.0\n");
}

TEST(Cli, EvalWritesReportAndFrozenConfig) {
  const auto dir = temp_dir("eval");
  auto opt = fixtures::suite_options();
  const auto table = fixtures::oracle_table(eval::Suite::seeassign, opt);
  write_file(dir / "mock.json", nlohmann::json(table).dump());
  write_file(dir / "run.toml", fixtures::read_text(fixtures::data_dir() / "fixture.toml") + "\n[llm]\nmock_fixture = \"" +
                                   (dir / "mock.json").string() + "\"\n");
  // The run config must resolve fixture paths like the original.
  std::filesystem::copy(fixtures::data_dir(), dir / "data", std::filesystem::copy_options::recursive);
  std::filesystem::rename(dir / "run.toml", dir / "data" / "run.toml");
  const auto r = fixtures::run_cli({"--config", (dir / "data" / "run.toml").string(), "eval", "--suite", "seeassign",
                                    "--data", (dir / "data" / "eval" / "seeassign.jsonl").string(), "--out",
                                    (dir / "report").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("1.000"), std::string::npos) << r.output;
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(fixtures::read_text(dir / "report" / "report.json"))["overall"].get<double>(), 1.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "report" / "transcript.jsonl"));
  const auto frozen = load_config(dir / "report" / "config.toml");
  EXPECT_EQ(frozen.llm.mock_fixture, (dir / "mock.json").string());

  const auto again = fixtures::run_cli({"--config", (dir / "data" / "run.toml").string(), "eval", "--suite",
                                        "seeassign", "--data", (dir / "data" / "eval" / "seeassign.jsonl").string(),
                                        "--out", (dir / "rescored").string(), "--rescore",
                                        (dir / "report" / "transcript.jsonl").string()});
  ASSERT_EQ(again.exit_code, 0) << again.output;
  EXPECT_EQ(fixtures::read_text(dir / "rescored" / "report.json"), fixtures::read_text(dir / "report" / "report.json"));
}

TEST(Cli, ExportDataset) {
  const auto in = temp_dir("cli_export_in"), out = temp_dir("cli_export_out");
  std::filesystem::copy_file(fixtures::golden("grid.parsed.json"), in / "grid.parsed.json");
  const auto r = fixtures::run_cli({"export-dataset", in.string(), "--format", "detection_yolo", "--out", out.string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::ifstream f(out / "grid.txt");
  int lines = 0;
  for (std::string l; std::getline(f, l);) ++lines;
  EXPECT_EQ(lines, 48);
}

// -- HTTP service ---------------------------------------------------------------------------------------

TEST(Service, ParseMatchesCliGoldenAndServesOverlay) {
  fixtures::LiveService svc(fixtures::config(), fixtures::adapters());
  auto cli = svc.client();
  auto health = cli.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->body, "ok");

  const auto png = fixtures::read_text(fixtures::screen("settings"));
  auto res = cli.Post("/v1/parse?image_id=settings", png, "image/png");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(res->body, fixtures::read_text(fixtures::golden("settings.parsed.json")));
  const auto id = res->get_header_value("X-Request-Id");
  ASSERT_FALSE(id.empty());

  auto overlay = cli.Get("/v1/parse/" + id + "/overlay");
  ASSERT_TRUE(overlay);
  EXPECT_EQ(overlay->status, 200);
  EXPECT_EQ(overlay->body, fixtures::read_text(fixtures::golden("settings.overlay.png")));
  auto missing = cli.Get("/v1/parse/req-nope/overlay");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  // Multipart upload of the same image.
  httplib::MultipartFormDataItems items{{"image", png, "settings.png", "image/png"}};
  auto multi = cli.Post("/v1/parse?image_id=settings", items);
  ASSERT_TRUE(multi);
  EXPECT_EQ(multi->status, 200);
  EXPECT_EQ(multi->body, res->body);
  httplib::MultipartFormDataItems wrong{{"file", png, "settings.png", "image/png"}};
  auto bad_field = cli.Post("/v1/parse", wrong);
  ASSERT_TRUE(bad_field);
  EXPECT_EQ(bad_field->status, 400);

  EXPECT_NE(svc.log().find("[serve] " + id + " POST /v1/parse -> 200"), std::string::npos) << svc.log();
}

TEST(Service, ErrorStatuses) {
  auto cfg = fixtures::config();
  cfg.service.max_body_bytes = 4096;
  {
    fixtures::LiveService svc(cfg, fixtures::adapters());
    auto cli = svc.client();
    auto junk = cli.Post("/v1/parse", "definitely not an image", "application/octet-stream");
    ASSERT_TRUE(junk);
    EXPECT_EQ(junk->status, 400);
    auto big = cli.Post("/v1/parse", std::string(16384, 'x'), "application/octet-stream");
    ASSERT_TRUE(big);
    EXPECT_EQ(big->status, 413);
  }
  {
    fixtures::LiveService svc(fixtures::config(), make_adapters(AppConfig{}));
    auto res = svc.client().Post("/v1/parse", fixtures::read_text(fixtures::screen("blank")), "image/png");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 503);
  }
}

TEST(Service, ConcurrentRequestsAgree) {
  fixtures::LiveService svc(fixtures::config(), fixtures::adapters());
  const auto png = fixtures::read_text(fixtures::screen("login"));
  const auto golden = fixtures::read_text(fixtures::golden("login.parsed.json"));
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 6; ++i)
    threads.emplace_back([&] {
      auto res = svc.client().Post("/v1/parse?image_id=login", png, "image/png");
      if (res && res->status == 200 && res->body == golden) ++ok;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 6);
}

TEST(OverlayCache, EvictsLeastRecentlyUsed) {
  OverlayCache cache(2);
  cache.put("a", {1});
  cache.put("b", {2});
  EXPECT_TRUE(cache.get("a"));
  cache.put("c", {3});
  EXPECT_FALSE(cache.get("b"));
  EXPECT_TRUE(cache.get("a"));
  EXPECT_TRUE(cache.get("c"));
  EXPECT_EQ(cache.size(), 2u);
}
