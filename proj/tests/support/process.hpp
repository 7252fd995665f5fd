/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Runs the built CLI as a subprocess and talks to an in-process service.

#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "omniparse/service.hpp"

namespace fixtures {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, interleaved
};

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::string cmd = shell_quote(OMNIPARSE_CLI);
  for (const auto& a : args) cmd += " " + shell_quote(a);
  cmd += " 2>&1";
  CliResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

/// ParseService on an ephemeral loopback port for the lifetime of the object.
class LiveService {
 public:
  LiveService(omniparse::AppConfig cfg, omniparse::Adapters adapters)
      : service_(std::move(cfg), std::move(adapters), log_) {
    port_ = service_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_.listen(); });
    service_.wait_until_ready();
  }
  ~LiveService() {
    service_.stop();
    thread_.join();
  }

  int port() const { return port_; }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }
  std::string log() const { return log_.str(); }

 private:
  std::ostringstream log_;
  omniparse::ParseService service_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace fixtures
