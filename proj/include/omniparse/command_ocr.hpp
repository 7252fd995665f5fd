/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "omniparse/adapters.hpp"

namespace omniparse {

/// OCR through an external engine run as a subprocess.
///
/// The command template receives the screenshot as a temporary PNG via the
/// `{image}` placeholder, e.g. `tesseract {image} - tsv`. Standard output is
/// either a JSON array of {x,y,w,h,text,confidence} or Tesseract TSV, in which
/// case words are grouped into lines by (block, paragraph, line).
class CommandOcr final : public OcrEngine {
 public:
  explicit CommandOcr(std::string command_template) : template_(std::move(command_template)) {
    if (template_.find("{image}") == std::string::npos)
      throw ModelUnavailable("ocr.engine_cmd must contain the {image} placeholder");
  }

  static std::vector<OcrLine> parse_output(const std::string& out) {
    const auto first = out.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && out[first] == '[') return parse_json(out);
    return parse_tsv(out);
  }

 protected:
  std::vector<OcrLine> recognize(const Image& image) const override {
    static std::atomic<unsigned> counter{0};
    const auto path = std::filesystem::temp_directory_path() /
                      ("omniparse-ocr-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".png");
    write_bytes(path, encode_png(image.pixels));

    std::string cmd = template_;
    const std::string quoted = "'" + path.string() + "'";
    for (auto pos = cmd.find("{image}"); pos != std::string::npos; pos = cmd.find("{image}", pos + quoted.size()))
      cmd.replace(pos, 7, quoted);

    std::string output;
    int status = -1;
    if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
      char buf[4096];
      std::size_t n;
      while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
      status = ::pclose(pipe);
    }
    std::error_code ec;
    std::filesystem::remove(path, ec);
    if (status != 0) throw ModelUnavailable("ocr engine command failed (status " + std::to_string(status) + "): " + cmd);
    try {
      return parse_output(output);
    } catch (const std::exception& e) {
      throw ModelUnavailable(std::string("cannot parse ocr engine output: ") + e.what());
    }
  }

 private:
  static std::vector<OcrLine> parse_json(const std::string& out) {
    std::vector<OcrLine> lines;
    for (const auto& l : nlohmann::json::parse(out))
      lines.push_back({detail::box_from(l), l.at("text").get<std::string>(), l.value("confidence", 1.0)});
    return lines;
  }

  static std::vector<OcrLine> parse_tsv(const std::string& out) {
    struct Acc {
      double left = 1e18, top = 1e18, right = -1e18, bottom = -1e18;
      std::string text;
      double conf_sum = 0;
      int words = 0;
    };
    std::map<std::tuple<int, int, int, int>, Acc> groups;
    std::vector<std::tuple<int, int, int, int>> order;

    std::istringstream in(out);
    std::string row;
    bool header = true;
    while (std::getline(in, row)) {
      if (!row.empty() && row.back() == '\r') row.pop_back();
      if (header) {
        header = false;
        if (row.rfind("level", 0) == 0) continue;
      }
      std::vector<std::string> cols;
      std::stringstream ss(row);
      std::string col;
      while (std::getline(ss, col, '\t')) cols.push_back(col);
      if (cols.size() < 12 || cols[0] != "5") continue;
      const std::string word = trim(cols[11]);
      if (word.empty()) continue;
      const auto key = std::make_tuple(std::stoi(cols[1]), std::stoi(cols[2]), std::stoi(cols[3]), std::stoi(cols[4]));
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      auto& a = it->second;
      const double l = std::stod(cols[6]), t = std::stod(cols[7]), w = std::stod(cols[8]), h = std::stod(cols[9]);
      a.left = std::min(a.left, l);
      a.top = std::min(a.top, t);
      a.right = std::max(a.right, l + w);
      a.bottom = std::max(a.bottom, t + h);
      if (!a.text.empty()) a.text += ' ';
      a.text += word;
      a.conf_sum += std::max(0.0, std::stod(cols[10])) / 100.0;
      ++a.words;
    }
    std::vector<OcrLine> lines;
    for (const auto& key : order) {
      const auto& a = groups.at(key);
      if (a.right <= a.left || a.bottom <= a.top) continue;
      lines.push_back({BBox{a.left, a.top, a.right - a.left, a.bottom - a.top}, a.text, a.conf_sum / a.words});
    }
    return lines;
  }

  std::string template_;
};

}  // namespace omniparse
