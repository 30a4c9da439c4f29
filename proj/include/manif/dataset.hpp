#ifndef MANIF_DATASET_HPP
#define MANIF_DATASET_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "manif/errors.hpp"
#include "manif/param_vector.hpp"
#include "manif/rng.hpp"

namespace manif {

struct Dataset {
  std::vector<Vec> inputs;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return inputs.size(); }
  int dim() const { return inputs.empty() ? 0 : static_cast<int>(inputs[0].size()); }

  void validate() const {
    if (inputs.size() != labels.size())
      throw DimensionError("dataset: inputs/labels length mismatch");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (inputs[i].size() != inputs[0].size())
        throw DimensionError("dataset: ragged input dimensions");
      if (labels[i] < 0 || labels[i] >= class_count)
        throw ConfigError("dataset: label out of range");
    }
  }
};

// Deterministic class centers: corners of the hypercube {-1,+1}^dim,
// enumerated by the binary digits of the class index; classes beyond
// 2^dim reuse the corners at radius scaled by (1 + ring). Centers are
// pairwise distinct for any class count.
inline Vec cluster_center(int class_index, int dim) {
  int bits = dim < 20 ? dim : 20;
  std::uint64_t corners = 1ull << bits;
  std::uint64_t ring = static_cast<std::uint64_t>(class_index) / corners;
  std::uint64_t q = static_cast<std::uint64_t>(class_index) % corners;
  Vec c(dim);
  for (int d = 0; d < dim; ++d) {
    double sign = (d < bits && ((q >> d) & 1ull)) ? 1.0 : -1.0;
    c[d] = sign * (1.0 + static_cast<double>(ring));
  }
  return c;
}

// Isotropic Gaussian blobs around the deterministic centers, class-major
// order (all of class 0, then class 1, ...).
inline Dataset gen_gaussian_clusters(int class_count, int per_class, int dim,
                                     double spread, std::uint64_t seed) {
  if (class_count < 1) throw ConfigError("gen_gaussian_clusters: class_count < 1");
  if (per_class < 1) throw ConfigError("gen_gaussian_clusters: per_class < 1");
  if (dim < 1) throw ConfigError("gen_gaussian_clusters: dim < 1");
  if (spread < 0.0) throw ConfigError("gen_gaussian_clusters: spread < 0");
  Dataset d;
  d.class_count = class_count;
  d.inputs.reserve(static_cast<std::size_t>(class_count) * per_class);
  d.labels.reserve(static_cast<std::size_t>(class_count) * per_class);
  Rng rng(seed);
  for (int c = 0; c < class_count; ++c) {
    Vec center = cluster_center(c, dim);
    for (int i = 0; i < per_class; ++i) {
      Vec x(dim);
      for (int k = 0; k < dim; ++k) x[k] = center[k] + spread * rng.normal();
      d.inputs.push_back(std::move(x));
      d.labels.push_back(c);
    }
  }
  return d;
}

namespace detail {

inline std::uint32_t read_u32_be(const unsigned char* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(FormatError::Code::truncated, "cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(f),
                                    std::istreambuf_iterator<char>());
}

}  // namespace detail

// IDX image/label pair loader (big-endian headers, u8 pixels scaled to
// [0,1], images flattened row-major). Magic numbers: 0x00000803 for the
// image file, 0x00000801 for the label file.
inline Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  using Code = FormatError::Code;
  std::vector<unsigned char> img = detail::read_file_bytes(images_path);
  if (img.size() < 16)
    throw FormatError(Code::truncated, images_path + ": header truncated");
  if (detail::read_u32_be(&img[0]) != 0x00000803u)
    throw FormatError(Code::bad_magic, images_path + ": bad image magic");
  std::uint64_t n = detail::read_u32_be(&img[4]);
  std::uint64_t rows = detail::read_u32_be(&img[8]);
  std::uint64_t cols = detail::read_u32_be(&img[12]);
  std::uint64_t pixels = n * rows * cols;
  if (img.size() != 16 + pixels)
    throw FormatError(Code::truncated, images_path + ": pixel data truncated");

  std::vector<unsigned char> lab = detail::read_file_bytes(labels_path);
  if (lab.size() < 8)
    throw FormatError(Code::truncated, labels_path + ": header truncated");
  if (detail::read_u32_be(&lab[0]) != 0x00000801u)
    throw FormatError(Code::bad_magic, labels_path + ": bad label magic");
  std::uint64_t nl = detail::read_u32_be(&lab[4]);
  if (lab.size() != 8 + nl)
    throw FormatError(Code::truncated, labels_path + ": label data truncated");
  if (nl != n)
    throw FormatError(Code::count_mismatch,
                      "image/label count mismatch: " + std::to_string(n) +
                          " vs " + std::to_string(nl));

  Dataset d;
  d.inputs.resize(n);
  d.labels.resize(n);
  int max_label = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    Vec x(rows * cols);
    const unsigned char* px = &img[16 + i * rows * cols];
    for (std::uint64_t j = 0; j < rows * cols; ++j)
      x[j] = static_cast<double>(px[j]) / 255.0;
    d.inputs[i] = std::move(x);
    d.labels[i] = lab[8 + i];
    if (d.labels[i] > max_label) max_label = d.labels[i];
  }
  d.class_count = max_label + 1;
  return d;
}

}  // namespace manif

#endif
