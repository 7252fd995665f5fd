/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <filesystem>
#include <mutex>
#include <vector>

#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include "omniparse/adapters.hpp"

namespace omniparse {

/// Interactable-region detector backed by an ONNX export of a single-class
/// YOLOv8-style model (output tensor [1, 4 + classes, anchors], boxes as
/// centre/size in network-input pixels). Input is letterboxed to a square.
///
/// cv::dnn::Net is not reentrant, so inference is serialized internally; the
/// adapter is safe to share but concurrent callers queue.
class OnnxDetector final : public Detector {
 public:
  explicit OnnxDetector(const std::filesystem::path& model_path, int input_size = 640) : input_size_(input_size) {
    if (!std::filesystem::is_regular_file(model_path))
      throw ModelUnavailable("detector model not found: " + model_path.string());
    try {
      net_ = cv::dnn::readNetFromONNX(model_path.string());
    } catch (const cv::Exception& e) {
      throw ModelUnavailable("cannot load detector model " + model_path.string() + ": " + e.what());
    }
    if (net_.empty()) throw ModelUnavailable("cannot load detector model " + model_path.string());
  }

 protected:
  std::vector<RawDetection> propose(const Image& image, const DetectorConfig& cfg) const override {
    const double scale = std::min(static_cast<double>(input_size_) / image.width(),
                                  static_cast<double>(input_size_) / image.height());
    const int rw = std::max(1, static_cast<int>(image.width() * scale));
    const int rh = std::max(1, static_cast<int>(image.height() * scale));
    const int pad_x = (input_size_ - rw) / 2;
    const int pad_y = (input_size_ - rh) / 2;

    cv::Mat resized;
    cv::resize(image.pixels, resized, cv::Size(rw, rh));
    cv::Mat letterbox(input_size_, input_size_, CV_8UC3, cv::Scalar(114, 114, 114));
    resized.copyTo(letterbox(cv::Rect(pad_x, pad_y, rw, rh)));
    cv::Mat blob = cv::dnn::blobFromImage(letterbox, 1.0 / 255.0, cv::Size(), cv::Scalar(), true, false);

    cv::Mat out;
    {
      std::lock_guard lock(mutex_);
      try {
        net_.setInput(blob);
        out = net_.forward();
      } catch (const cv::Exception& e) {
        throw ModelUnavailable(std::string("detector inference failed: ") + e.what());
      }
    }
    if (out.dims != 3 || out.size[1] < 5) throw ModelUnavailable("unexpected detector output shape");

    const int rows = out.size[1];
    const int anchors = out.size[2];
    cv::Mat table(rows, anchors, CV_32F, out.ptr<float>());
    std::vector<RawDetection> dets;
    for (int a = 0; a < anchors; ++a) {
      float best = 0.f;
      for (int r = 4; r < rows; ++r) best = std::max(best, table.at<float>(r, a));
      if (best < cfg.confidence_threshold) continue;
      const double cx = (table.at<float>(0, a) - pad_x) / scale;
      const double cy = (table.at<float>(1, a) - pad_y) / scale;
      const double w = table.at<float>(2, a) / scale;
      const double h = table.at<float>(3, a) / scale;
      dets.push_back({BBox{cx - w / 2, cy - h / 2, w, h}, best, Source::icon_detector});
    }
    return dets;
  }

 private:
  int input_size_;
  mutable cv::dnn::Net net_;
  mutable std::mutex mutex_;
};

}  // namespace omniparse
