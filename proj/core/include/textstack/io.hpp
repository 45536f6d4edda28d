// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace textstack {

/// 64-bit FNV-1a. Used both for hashed n-gram buckets and for artifact
/// content hashes in manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(s.data(), s.size());
}

/// Hex digest of a file's bytes. Throws if the file cannot be read.
std::string hash_file(const std::filesystem::path& path);

/// Common framing for serialized models: magic, then a kind tag, then the
/// ingest-manifest hash the model was trained against (empty outside the
/// pipeline), then the payload.
inline constexpr std::string_view kModelMagic = "TSTKMDL1";

enum class ModelKind : std::uint32_t {
  logreg = 1,
  lex_lr = 2,
  ngram = 3,
  bilstm = 4,
};

std::string to_hex(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Little-endian binary writer for model files. Doubles are stored as their
/// raw bit patterns so round trips are bit-exact.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(std::string_view s);
  void vec(const Eigen::VectorXd& v);
  void mat(const Eigen::MatrixXd& m);
  void strings(const std::vector<std::string>& v);

  void close();

 private:
  void raw(const void* data, std::size_t len);
  std::ofstream out_;
  std::filesystem::path path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  Eigen::VectorXd vec();
  Eigen::MatrixXd mat();
  std::vector<std::string> strings();

 private:
  void raw(void* data, std::size_t len);
  std::ifstream in_;
  std::filesystem::path path_;
};

}  // namespace textstack
