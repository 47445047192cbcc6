#ifndef EIPOLAB_CHECKPOINT_HPP_
#define EIPOLAB_CHECKPOINT_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "eipolab/common.hpp"

namespace eipolab {

// Little-endian byte sink for checkpoint payloads.
class ByteWriter {
 public:
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void boolean(bool v) { u32(v ? 1U : 0U); }
  void str(const std::string& s);
  void f64s(std::span<const double> values);
  void rng(const Rng& engine);

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  bool boolean() { return u32() != 0U; }
  std::string str();
  std::vector<double> f64s();
  void f64s_into(std::span<double> out);
  void rng(Rng& engine);

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

// Versioned checkpoint container:
//   magic "EIPOCKPT" | u32 format version | u64 architecture hash |
//   u32 section count | { u32 tag length, tag, u64 payload length, payload }*
// Sections are written in tag order so the blob is byte-stable.
class Checkpoint {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  explicit Checkpoint(std::uint64_t architecture_hash = 0)
      : architecture_hash_(architecture_hash) {}

  std::uint64_t architecture_hash() const { return architecture_hash_; }

  void put(const std::string& tag, std::string payload);
  bool has(const std::string& tag) const;
  // Throws ConfigError when the section is missing.
  const std::string& get(const std::string& tag) const;

  std::string serialize() const;
  static Checkpoint deserialize(std::string_view blob);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::uint64_t architecture_hash_;
  std::map<std::string, std::string> sections_;
};

}  // namespace eipolab

#endif  // EIPOLAB_CHECKPOINT_HPP_
