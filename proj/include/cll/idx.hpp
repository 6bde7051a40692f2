// Copyright 2026 The cll Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// IDX container (MNIST family). Big-endian header: magic 0x00000803 for u8
// images N x rows x cols, 0x00000801 for u8 labels N. Labels in the file are
// already 0-based class indices.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cll/data.hpp"
#include "cll/error.hpp"

namespace cll {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;  ///< count * rows * cols, row-major
};

namespace detail {

inline std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off,
                          const std::string& path) {
  if (b.size() < off + 4) throw FormatError(b.size(), path + ": truncated header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

inline void put_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

}  // namespace detail

inline IdxImages read_idx_images(const std::string& path) {
  const auto bytes = detail::slurp(path);
  const std::uint32_t magic = detail::be32(bytes, 0, path);
  if (magic != kIdxImagesMagic) throw FormatError(0, path + ": bad image magic");
  IdxImages img;
  img.count = detail::be32(bytes, 4, path);
  img.rows = detail::be32(bytes, 8, path);
  img.cols = detail::be32(bytes, 12, path);
  const std::size_t payload = std::size_t{img.count} * img.rows * img.cols;
  if (bytes.size() < 16 + payload) {
    throw FormatError(bytes.size(), path + ": truncated pixel payload, expected " +
                                        std::to_string(16 + payload) + " bytes");
  }
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(payload));
  return img;
}

inline std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  const auto bytes = detail::slurp(path);
  const std::uint32_t magic = detail::be32(bytes, 0, path);
  if (magic != kIdxLabelsMagic) throw FormatError(0, path + ": bad label magic");
  const std::uint32_t n = detail::be32(bytes, 4, path);
  if (bytes.size() < 8 + std::size_t{n}) {
    throw FormatError(bytes.size(), path + ": truncated label payload");
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + n};
}

/// Pixels become doubles in [0, 1] (value / 255), flattened row-major.
/// K is inferred as max label + 1 when `k` is 0.
inline LabeledDataset load_idx_pair(const std::string& images_path,
                                    const std::string& labels_path, int k = 0) {
  const IdxImages img = read_idx_images(images_path);
  const auto labels = read_idx_labels(labels_path);
  if (labels.size() != img.count) {
    throw FormatError(4, "image count " + std::to_string(img.count) +
                             " does not match label count " + std::to_string(labels.size()));
  }
  LabeledDataset out;
  const Eigen::Index d = static_cast<Eigen::Index>(img.rows) * img.cols;
  out.features.resize(img.count, d);
  for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out.features(i, j) = img.pixels[static_cast<std::size_t>(i * d + j)] / 255.0;
    }
  }
  out.labels.assign(labels.begin(), labels.end());
  const int max_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
  out.k = k > 0 ? k : max_label + 1;
  if (max_label >= out.k) {
    throw FormatError(8, labels_path + ": label " + std::to_string(max_label) +
                             " exceeds class count");
  }
  return out;
}

/// Writes features (multiples of 1/255 in [0,1]) and labels as an IDX pair.
inline void write_idx_pair(const std::string& images_path, const std::string& labels_path,
                           const LabeledDataset& data, std::uint32_t rows, std::uint32_t cols) {
  if (static_cast<Eigen::Index>(rows) * cols != data.dim()) {
    throw Error(ErrorCode::dimension_mismatch, "rows * cols must equal feature dimension");
  }
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorCode::io_error, "cannot create IDX output files");
  detail::put_be32(img, kIdxImagesMagic);
  detail::put_be32(img, static_cast<std::uint32_t>(data.size()));
  detail::put_be32(img, rows);
  detail::put_be32(img, cols);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      const double v = std::clamp(data.features(i, j), 0.0, 1.0);
      img.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
  }
  detail::put_be32(lab, kIdxLabelsMagic);
  detail::put_be32(lab, static_cast<std::uint32_t>(data.labels.size()));
  for (int y : data.labels) lab.put(static_cast<char>(static_cast<std::uint8_t>(y)));
  if (!img || !lab) throw Error(ErrorCode::io_error, "IDX write failed");
}

}  // namespace cll
