/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>
#include <vector>

#include "omniparse/adapters.hpp"
#include "omniparse/fusion.hpp"

namespace omniparse {

struct SemanticEntry {
  int element_id = 0;
  ElementKind kind = ElementKind::icon;
  std::string description;

  friend bool operator==(const SemanticEntry&, const SemanticEntry&) = default;
};

/// Captions every icon that has no content yet. Icons that absorbed OCR text
/// keep it and are not sent to the captioner. All-or-nothing: on captioner
/// failure the screen is left untouched and the error propagates.
inline void attach_captions(ParsedScreen& screen, const Image& image, const Captioner& captioner,
                            const std::string& prompt = std::string(kDefaultCaptionPrompt)) {
  std::vector<std::size_t> pending;
  CaptionRequest req{&image, {}, prompt};
  for (std::size_t i = 0; i < screen.elements.size(); ++i) {
    const auto& e = screen.elements[i];
    if (e.kind == ElementKind::icon && !e.has_content()) {
      pending.push_back(i);
      req.crops.push_back(e.bbox);
    }
  }
  if (pending.empty()) return;
  auto captions = captioner.caption(req);
  for (std::size_t k = 0; k < pending.size(); ++k) screen.elements[pending[k]].content = std::move(captions[k]);
}

namespace detail {

inline std::string single_line(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\r' && i + 1 < s.size() && s[i + 1] == '\n') continue;
    out.push_back(s[i] == '\n' || s[i] == '\r' ? ' ' : s[i]);
  }
  return out;
}

}  // namespace detail

/// One line per element, id order:  Box ID <id>: <Text|Icon> '<content>'
/// Embedded newlines become spaces.
inline std::string build_local_semantics(const std::vector<UIElement>& elements) {
  std::vector<const UIElement*> order;
  for (const auto& e : elements) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const UIElement* a, const UIElement* b) { return a->id < b->id; });

  std::string block;
  for (const UIElement* e : order) {
    if (!e->has_content()) throw MissingContent("element " + std::to_string(e->id) + " has no content");
    if (!block.empty()) block += '\n';
    block += "Box ID " + std::to_string(e->id) + ": " + (e->kind == ElementKind::text ? "Text" : "Icon") + " '" +
             detail::single_line(*e->content) + "'";
  }
  return block;
}

inline void build_local_semantics(ParsedScreen& screen) { screen.semantics_block = build_local_semantics(screen.elements); }

/// Inverse of build_local_semantics for contents without newlines.
inline std::vector<SemanticEntry> parse_local_semantics(const std::string& block) {
  std::vector<SemanticEntry> out;
  std::size_t pos = 0;
  while (pos < block.size()) {
    auto end = block.find('\n', pos);
    if (end == std::string::npos) end = block.size();
    const std::string line = block.substr(pos, end - pos);
    pos = end + 1;

    static constexpr std::string_view kPrefix = "Box ID ";
    if (line.rfind(kPrefix, 0) != 0) throw InvalidArgument("bad semantics line: " + line);
    const auto colon = line.find(": ", kPrefix.size());
    if (colon == std::string::npos) throw InvalidArgument("bad semantics line: " + line);
    SemanticEntry entry;
    entry.element_id = std::stoi(line.substr(kPrefix.size(), colon - kPrefix.size()));
    const std::string rest = line.substr(colon + 2);
    if (rest.rfind("Text '", 0) == 0) {
      entry.kind = ElementKind::text;
    } else if (rest.rfind("Icon '", 0) == 0) {
      entry.kind = ElementKind::icon;
    } else {
      throw InvalidArgument("bad semantics line: " + line);
    }
    if (rest.size() < 7 || rest.back() != '\'') throw InvalidArgument("bad semantics line: " + line);
    entry.description = rest.substr(6, rest.size() - 7);
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace omniparse
