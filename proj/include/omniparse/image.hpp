/*
 * Copyright (c) 2026 The omniparse authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <openssl/evp.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "omniparse/errors.hpp"

namespace omniparse {

/// A decoded screenshot. Pixels are always 8-bit BGR.
struct Image {
  std::string id;
  cv::Mat pixels;

  int width() const { return pixels.cols; }
  int height() const { return pixels.rows; }
};

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageDecodeError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Image decode_image(std::span<const std::uint8_t> bytes, std::string id) {
  if (bytes.empty()) throw ImageDecodeError("empty image buffer for '" + id + "'");
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat decoded;
  try {
    decoded = cv::imdecode(raw, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw ImageDecodeError("cannot decode image '" + id + "': " + e.what());
  }
  if (decoded.empty()) throw ImageDecodeError("cannot decode image '" + id + "'");
  return Image{std::move(id), decoded};
}

/// Loads an image file; the id defaults to the file stem.
inline Image load_image(const std::filesystem::path& path, std::string id = {}) {
  if (id.empty()) id = path.stem().string();
  if (!std::filesystem::is_regular_file(path)) throw ImageDecodeError("cannot read " + path.string());
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes, std::move(id));
  } catch (const ImageDecodeError&) {
    throw ImageDecodeError("cannot decode image " + path.string());
  }
}

inline std::vector<std::uint8_t> encode_png(const cv::Mat& pixels) {
  std::vector<std::uint8_t> out;
  // Fixed compression parameters keep the encoded bytes stable.
  const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6, cv::IMWRITE_PNG_STRATEGY,
                                cv::IMWRITE_PNG_STRATEGY_DEFAULT};
  if (!cv::imencode(".png", pixels, out, params)) throw RenderError("png encoding failed");
  return out;
}

inline void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::string sha256_hex(std::span<const std::uint8_t> data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

inline std::string sha256_hex(const std::string& text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

/// Digest of decoded pixel content (dimensions, type, raw rows). Independent
/// of the file path and of the container format the pixels came from.
inline std::string pixel_digest(const cv::Mat& pixels) {
  cv::Mat packed = pixels.isContinuous() ? pixels : pixels.clone();
  std::string header = std::to_string(packed.cols) + "x" + std::to_string(packed.rows) + ":" +
                       std::to_string(packed.type()) + ":";
  std::vector<std::uint8_t> buf(header.begin(), header.end());
  const auto* data = packed.ptr<std::uint8_t>();
  buf.insert(buf.end(), data, data + packed.total() * packed.elemSize());
  return sha256_hex(buf);
}

inline std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace omniparse
