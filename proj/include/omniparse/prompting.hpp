/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "omniparse/errors.hpp"
#include "omniparse/fusion.hpp"

namespace omniparse {

enum class Platform { mobile, desktop, web };

inline std::string_view to_string(Platform p) {
  switch (p) {
    case Platform::mobile: return "mobile";
    case Platform::desktop: return "desktop";
    case Platform::web: return "web";
  }
  return "web";
}

inline Platform platform_from_string(std::string_view s) {
  if (s == "mobile") return Platform::mobile;
  if (s == "desktop") return Platform::desktop;
  if (s == "web") return Platform::web;
  throw InvalidArgument("unknown platform '" + std::string(s) + "'");
}

struct TaskSpec {
  std::string task_text;
  Platform platform = Platform::web;
};

struct ActionHistory {
  /// (step index, summary); indices strictly increasing from 0.
  std::vector<std::pair<int, std::string>> steps;

  void validate() const {
    for (std::size_t i = 0; i < steps.size(); ++i)
      if (steps[i].first != static_cast<int>(i)) throw InvalidArgument("action history indices must be 0,1,2,...");
  }

  static ActionHistory from(const std::vector<std::string>& summaries) {
    ActionHistory h;
    for (std::size_t i = 0; i < summaries.size(); ++i) h.steps.emplace_back(static_cast<int>(i), summaries[i]);
    return h;
  }
};

enum class ActionKind {
  click,
  type,
  select,
  press_back,
  press_home,
  press_enter,
  status_complete,
  status_impossible,
};

inline constexpr std::array<std::pair<ActionKind, std::string_view>, 8> kActionNames{{
    {ActionKind::click, "CLICK"},
    {ActionKind::type, "TYPE"},
    {ActionKind::select, "SELECT"},
    {ActionKind::press_back, "PRESS_BACK"},
    {ActionKind::press_home, "PRESS_HOME"},
    {ActionKind::press_enter, "PRESS_ENTER"},
    {ActionKind::status_complete, "STATUS_COMPLETE"},
    {ActionKind::status_impossible, "STATUS_IMPOSSIBLE"},
}};

inline std::string_view action_name(ActionKind k) {
  for (const auto& [kind, name] : kActionNames)
    if (kind == k) return name;
  return "CLICK";
}

inline std::optional<ActionKind> action_from_name(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (const auto& [kind, n] : kActionNames)
    if (n == upper) return kind;
  return std::nullopt;
}

inline bool needs_target(ActionKind k) {
  return k == ActionKind::click || k == ActionKind::type || k == ActionKind::select;
}
inline bool needs_value(ActionKind k) { return k == ActionKind::type || k == ActionKind::select; }

struct AgentAction {
  ActionKind kind = ActionKind::click;
  std::optional<int> target_id;
  std::optional<std::string> value;

  void validate() const {
    const auto name = std::string(action_name(kind));
    if (needs_target(kind) && !target_id) throw InvalidAction(name + " requires a target box");
    if (!needs_target(kind) && target_id) throw InvalidAction(name + " takes no target box");
    if (needs_value(kind) && !value) throw InvalidAction(name + " requires a value");
    if (!needs_value(kind) && value) throw InvalidAction(name + " takes no value");
    if (target_id && *target_id < 0) throw InvalidAction("negative target box");
    // Values travel on one line of the response grammar, which trims them.
    if (value) {
      const auto& v = *value;
      if (v.find_first_of("\r\n") != std::string::npos) throw InvalidAction("value must be a single line");
      if (!v.empty() && (std::isspace(static_cast<unsigned char>(v.front())) ||
                         std::isspace(static_cast<unsigned char>(v.back())) || v.back() == '`'))
        throw InvalidAction("value must not start or end with whitespace or a backtick");
    }
  }

  friend bool operator==(const AgentAction&, const AgentAction&) = default;
};

enum class ActionSpace { mind2web, aitw };

inline std::vector<ActionKind> legal_actions(ActionSpace space) {
  if (space == ActionSpace::mind2web) return {ActionKind::click, ActionKind::type, ActionKind::select};
  return {ActionKind::click,       ActionKind::type,           ActionKind::press_back,      ActionKind::press_home,
          ActionKind::press_enter, ActionKind::status_complete, ActionKind::status_impossible};
}

// -- SeeAssign prompts -----------------------------------------------------------

namespace templates {

inline constexpr std::string_view kVersion = "seeassign-v1";

inline constexpr std::string_view kSeeAssignPlain =
    "Here is a UI screenshot image with bounding boxes and corresponding labeled ID overlayed on top of it, "
    "your task is {task}. Which icon box label you should operate on? Give a brief analysis, then put your "
    "answer in the format of \n```Box with label ID: [xx]```\n";

inline constexpr std::string_view kSeeAssignWithSemantics =
    "Here is a UI screenshot image with bounding boxes and corresponding labeled ID overlayed on top of it, "
    "and here is a list of icon/text box description: {parsed_local_semantics}. Your task is {task}. Which "
    "bounding box label you should operate on? Give a brief analysis, then put your answer in the format of "
    "\n```Box with label ID: [xx]```\n";

}  // namespace templates

/// Single left-to-right pass over `{slot}` markers; substituted text is never
/// rescanned.
inline std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) break;
    const auto it = slots.find(std::string(tmpl.substr(open + 1, close - open - 1)));
    out.append(tmpl.substr(pos, open - pos));
    if (it != slots.end()) {
      out += it->second;
    } else {
      out.append(tmpl.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(std::min(pos, tmpl.size())));
  return out;
}

inline std::string build_seeassign_prompt(const TaskSpec& task, const std::optional<std::string>& semantics) {
  if (task.task_text.empty()) throw InvalidArgument("task text must not be empty");
  if (!semantics || semantics->empty()) return fill_template(templates::kSeeAssignPlain, {{"task", task.task_text}});
  return fill_template(templates::kSeeAssignWithSemantics,
                       {{"task", task.task_text}, {"parsed_local_semantics", *semantics}});
}

/// Last `Box with label ID: [n]` in the response.
inline int parse_box_id_response(const std::string& text) {
  static const std::regex pattern(R"(Box with label ID:\s*\[\s*(\d+)\s*\])");
  std::optional<int> last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), pattern); it != std::sregex_iterator(); ++it) {
    try {
      last = std::stoi((*it)[1].str());
    } catch (const std::out_of_range&) {
      last.reset();
    }
  }
  if (!last) throw UnparseableResponse("no 'Box with label ID: [n]' in response");
  return *last;
}

// -- agent prompts -----------------------------------------------------------------

/// Canonical one-line rendering, also the expected model output grammar:
///   Action: <KIND>; Box: [<id>]; Value: <text>
inline std::string format_action(const AgentAction& a) {
  std::string out = "Action: " + std::string(action_name(a.kind));
  if (a.target_id) out += "; Box: [" + std::to_string(*a.target_id) + "]";
  if (a.value) out += "; Value: " + *a.value;
  return out;
}

inline std::string build_agent_prompt(const TaskSpec& task, const ParsedScreen& screen, const ActionHistory& history,
                                      ActionSpace space) {
  if (task.task_text.empty()) throw InvalidArgument("task text must not be empty");
  history.validate();

  std::string p;
  p += "You are operating a " + std::string(to_string(task.platform)) + " user interface. Your task is: " +
       task.task_text + "\n\n";

  p += "You can take exactly one of the following actions:\n";
  for (auto k : legal_actions(space)) {
    p += "- " + std::string(action_name(k));
    switch (k) {
      case ActionKind::click: p += ": click the box with the given label ID. Requires Box.\n"; break;
      case ActionKind::type: p += ": type the given text into the box with the given label ID. Requires Box and Value.\n"; break;
      case ActionKind::select: p += ": choose the given option in the box with the given label ID. Requires Box and Value.\n"; break;
      case ActionKind::press_back: p += ": press the system back button.\n"; break;
      case ActionKind::press_home: p += ": press the system home button.\n"; break;
      case ActionKind::press_enter: p += ": press the enter key.\n"; break;
      case ActionKind::status_complete: p += ": declare the task complete.\n"; break;
      case ActionKind::status_impossible: p += ": declare the task impossible.\n"; break;
    }
  }
  p += "Give a brief analysis, then end your answer with one line in the format\n"
       "Action: <ACTION>; Box: [<label ID>]; Value: <text>\n"
       "leaving out Box and Value when the action does not take them.\n\n";

  p += "Here is a UI screenshot image with bounding boxes and corresponding labeled ID overlayed on top of it, "
       "and here is a list of icon/text box description:\n";
  p += screen.semantics_block;
  p += "\n";

  if (!history.steps.empty()) {
    p += "\nPrevious actions:\n";
    for (const auto& [idx, summary] : history.steps) p += "Step " + std::to_string(idx) + ": " + summary + "\n";
  }
  return p;
}

/// Parses the last `Action: ...` line of a response and validates it against
/// the action space.
inline AgentAction parse_action_response(const std::string& text, ActionSpace space) {
  static const std::regex line_re(R"(Action:\s*([A-Za-z_]+)([^\n]*))");
  static const std::regex box_re(R"(^\s*;\s*Box:\s*\[\s*(\d+)\s*\])");
  static const std::regex value_re(R"(^\s*;\s*Value:\s*(.*)$)");

  std::smatch last;
  bool found = false;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), line_re); it != std::sregex_iterator(); ++it) {
    last = *it;
    found = true;
  }
  if (!found) throw UnparseableResponse("no 'Action:' line in response");

  const auto kind = action_from_name(last[1].str());
  if (!kind) throw UnparseableResponse("unknown action '" + last[1].str() + "'");

  AgentAction action{*kind, std::nullopt, std::nullopt};
  std::string rest = last[2].str();
  std::smatch m;
  if (std::regex_search(rest, m, box_re)) {
    try {
      action.target_id = std::stoi(m[1].str());
    } catch (const std::out_of_range&) {
      throw UnparseableResponse("box id out of range");
    }
    rest = m.suffix().str();
  }
  if (std::regex_search(rest, m, value_re)) {
    std::string v = m[1].str();
    while (!v.empty() && (v.back() == '`' || std::isspace(static_cast<unsigned char>(v.back())))) v.pop_back();
    action.value = v;
    rest.clear();
  }
  // Anything left that is not fence or whitespace means the grammar was broken.
  if (std::any_of(rest.begin(), rest.end(), [](char c) { return c != '`' && !std::isspace(static_cast<unsigned char>(c)); }))
    throw UnparseableResponse("trailing text after action: '" + rest + "'");

  const auto legal = legal_actions(space);
  if (std::find(legal.begin(), legal.end(), action.kind) == legal.end())
    throw InvalidAction(std::string(action_name(action.kind)) + " is not available in this action space");
  action.validate();
  return action;
}

}  // namespace omniparse
