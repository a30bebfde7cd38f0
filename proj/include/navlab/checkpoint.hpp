#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "navlab/nn.hpp"

namespace navlab {

/// Versioned binary tensor archive:
///
///   "NAVLABCK"            8-byte magic
///   u32 version           currently 1
///   u32 len, bytes        architecture tag
///   u32 count             number of tensors
///   per tensor: u32 len, name bytes, u32 rows, u32 cols,
///               rows*cols little-endian f64 in column-major order
///
/// Optimizer moments and step counters are stored as ordinary tensors.
struct TensorArchive {
  static constexpr std::uint32_t kVersion = 1;

  struct Entry {
    std::string name;
    nn::Matrix value;
  };

  std::string arch;
  std::vector<Entry> entries;

  void add(std::string name, nn::Matrix value);
  bool has(std::string_view name) const;
  /// Throws ConfigError when the tensor is absent.
  const nn::Matrix& get(std::string_view name) const;
};

std::string encode_archive(const TensorArchive& archive);
TensorArchive decode_archive(std::string_view bytes);

void save_archive(const TensorArchive& archive, const std::filesystem::path& path);
TensorArchive load_archive(const std::filesystem::path& path);

void store_tensors(TensorArchive& archive, const std::vector<nn::ConstTensorRef>& tensors);
/// Copies archived values into existing tensors; names and shapes must match.
void restore_tensors(const TensorArchive& archive, const std::vector<nn::TensorRef>& tensors);

void store_adam(TensorArchive& archive, const std::string& prefix, const nn::AdamState& state);
void restore_adam(const TensorArchive& archive, const std::string& prefix, nn::AdamState& state);

}  // namespace navlab
