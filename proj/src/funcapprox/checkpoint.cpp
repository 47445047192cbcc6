#include "eipolab/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace eipolab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

void ByteWriter::u32(std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  bytes_.append(buf, 4);
}

void ByteWriter::u64(std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  bytes_.append(buf, 8);
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::str(const std::string& s) {
  u64(s.size());
  bytes_.append(s);
}

void ByteWriter::f64s(std::span<const double> values) {
  u64(values.size());
  for (double v : values) f64(v);
}

void ByteWriter::rng(const Rng& engine) {
  std::ostringstream os;
  os << engine;
  str(os.str());
}

void ByteReader::need(std::size_t n) const {
  if (pos_ + n > bytes_.size()) {
    throw ConfigError("checkpoint payload truncated");
  }
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v;
  std::memcpy(&v, bytes_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::string ByteReader::str() {
  const auto n = u64();
  need(n);
  std::string s(bytes_.substr(pos_, n));
  pos_ += n;
  return s;
}

std::vector<double> ByteReader::f64s() {
  const auto n = u64();
  need(n * 8);
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

void ByteReader::f64s_into(std::span<double> out) {
  const auto n = u64();
  if (n != out.size()) {
    throw ConfigError("checkpoint vector length " + std::to_string(n) +
                      " does not match expected " +
                      std::to_string(out.size()));
  }
  for (auto& v : out) v = f64();
}

void ByteReader::rng(Rng& engine) {
  std::istringstream is(str());
  is >> engine;
  if (!is) throw ConfigError("checkpoint holds a malformed RNG state");
}

namespace {
constexpr char kMagic[] = "EIPOCKPT";
}  // namespace

void Checkpoint::put(const std::string& tag, std::string payload) {
  sections_[tag] = std::move(payload);
}

bool Checkpoint::has(const std::string& tag) const {
  return sections_.contains(tag);
}

const std::string& Checkpoint::get(const std::string& tag) const {
  auto it = sections_.find(tag);
  if (it == sections_.end()) {
    throw ConfigError("checkpoint section '" + tag + "' missing");
  }
  return it->second;
}

std::string Checkpoint::serialize() const {
  ByteWriter w;
  std::string out(kMagic, 8);
  w.u32(kFormatVersion);
  w.u64(architecture_hash_);
  w.u32(static_cast<std::uint32_t>(sections_.size()));
  for (const auto& [tag, payload] : sections_) {
    w.str(tag);
    w.str(payload);
  }
  return out + w.bytes();
}

Checkpoint Checkpoint::deserialize(std::string_view blob) {
  if (blob.size() < 8 || blob.substr(0, 8) != std::string_view(kMagic, 8)) {
    throw ConfigError("not a checkpoint (bad magic)");
  }
  ByteReader r(blob.substr(8));
  const auto version = r.u32();
  if (version != kFormatVersion) {
    throw ConfigError("unsupported checkpoint format version " +
                      std::to_string(version));
  }
  Checkpoint ck(r.u64());
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    auto tag = r.str();
    ck.sections_[tag] = r.str();
  }
  if (!r.at_end()) throw ConfigError("trailing bytes after checkpoint");
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write checkpoint " + tmp);
    const auto blob = serialize();
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw ConfigError("short write on checkpoint " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw ConfigError("cannot move checkpoint into place: " + path);
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return deserialize(ss.str());
}

}  // namespace eipolab
