/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <exception>
#include <string>
#include <utility>

namespace omniparse {

/// Base for every error raised by the library. Carries an optional pipeline
/// stage so that failures inside parse_screen can be attributed.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) { rebuild(); }

  const char* what() const noexcept override { return full_.c_str(); }
  const std::string& message() const noexcept { return message_; }
  const std::string& stage() const noexcept { return stage_; }

  void set_stage(std::string stage) {
    stage_ = std::move(stage);
    rebuild();
  }

 private:
  void rebuild() { full_ = stage_.empty() ? message_ : "[" + stage_ + "] " + message_; }

  std::string message_;
  std::string stage_;
  std::string full_;
};

#define OMNIPARSE_DEFINE_ERROR(Name)            \
  class Name : public Error {                   \
   public:                                      \
    using Error::Error;                         \
  }

OMNIPARSE_DEFINE_ERROR(ModelUnavailable);
OMNIPARSE_DEFINE_ERROR(ImageDecodeError);
OMNIPARSE_DEFINE_ERROR(CropOutOfBounds);
OMNIPARSE_DEFINE_ERROR(InvalidArgument);
OMNIPARSE_DEFINE_ERROR(RenderError);
OMNIPARSE_DEFINE_ERROR(MissingContent);
OMNIPARSE_DEFINE_ERROR(UnparseableResponse);
OMNIPARSE_DEFINE_ERROR(InvalidAction);
OMNIPARSE_DEFINE_ERROR(DatasetFormatError);
OMNIPARSE_DEFINE_ERROR(ConfigError);

// llm transport
OMNIPARSE_DEFINE_ERROR(TransportError);
OMNIPARSE_DEFINE_ERROR(AuthError);
OMNIPARSE_DEFINE_ERROR(RateLimited);
OMNIPARSE_DEFINE_ERROR(Timeout);
OMNIPARSE_DEFINE_ERROR(MockMiss);

#undef OMNIPARSE_DEFINE_ERROR

}  // namespace omniparse
