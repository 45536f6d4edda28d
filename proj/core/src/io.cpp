// SPDX-License-Identifier: Apache-2.0
#include "textstack/io.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace textstack {

namespace {

template <typename T>
void store_le(unsigned char* out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out, &v, sizeof(T));
  } else {
    unsigned char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = tmp[sizeof(T) - 1 - i];
  }
}

template <typename T>
T load_le(const unsigned char* in) {
  T v;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(&v, in, sizeof(T));
  } else {
    unsigned char tmp[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) tmp[i] = in[sizeof(T) - 1 - i];
    std::memcpy(&v, tmp, sizeof(T));
  }
  return v;
}

}  // namespace

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read file: " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write file: " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

std::string hash_file(const std::filesystem::path& path) {
  return to_hex(fnv1a64(read_file(path)));
}

BinaryWriter::BinaryWriter(const std::filesystem::path& path)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
}

void BinaryWriter::raw(const void* data, std::size_t len) {
  out_.write(static_cast<const char*>(data),
             static_cast<std::streamsize>(len));
  if (!out_) {
    throw std::runtime_error("write failed: " + path_.string());
  }
}

void BinaryWriter::u32(std::uint32_t v) {
  unsigned char buf[4];
  store_le(buf, v);
  raw(buf, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  unsigned char buf[8];
  store_le(buf, v);
  raw(buf, 8);
}

void BinaryWriter::f64(double v) {
  unsigned char buf[8];
  store_le(buf, v);
  raw(buf, 8);
}

void BinaryWriter::str(std::string_view s) {
  u64(s.size());
  raw(s.data(), s.size());
}

void BinaryWriter::vec(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
}

void BinaryWriter::mat(const Eigen::MatrixXd& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) f64(m(r, c));
  }
}

void BinaryWriter::strings(const std::vector<std::string>& v) {
  u64(v.size());
  for (const auto& s : v) str(s);
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) {
    throw std::runtime_error("close failed: " + path_.string());
  }
}

BinaryReader::BinaryReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) {
    throw std::runtime_error("cannot open for reading: " + path.string());
  }
}

void BinaryReader::raw(void* data, std::size_t len) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
  if (static_cast<std::size_t>(in_.gcount()) != len) {
    throw std::runtime_error("truncated model file: " + path_.string());
  }
}

std::uint32_t BinaryReader::u32() {
  unsigned char buf[4];
  raw(buf, 4);
  return load_le<std::uint32_t>(buf);
}

std::uint64_t BinaryReader::u64() {
  unsigned char buf[8];
  raw(buf, 8);
  return load_le<std::uint64_t>(buf);
}

double BinaryReader::f64() {
  unsigned char buf[8];
  raw(buf, 8);
  return load_le<double>(buf);
}

std::string BinaryReader::str() {
  std::uint64_t len = u64();
  std::string s(len, '\0');
  if (len > 0) raw(s.data(), len);
  return s;
}

Eigen::VectorXd BinaryReader::vec() {
  std::uint64_t n = u64();
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
  return v;
}

Eigen::MatrixXd BinaryReader::mat() {
  std::uint64_t rows = u64();
  std::uint64_t cols = u64();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = f64();
  }
  return m;
}

std::vector<std::string> BinaryReader::strings() {
  std::uint64_t n = u64();
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) v.push_back(str());
  return v;
}

}  // namespace textstack
