#include "qtf/tagcore.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qtf {

namespace {

constexpr char kMagic[4] = {'Q', 'T', 'A', 'G'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kChannelCount = 4;

void put_u16(std::ostream& out, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint16_t get_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::optional<std::string> validate_stream(const TagStream& stream) {
  for (std::size_t i = 0; i < stream.tags.size(); ++i) {
    const TimeTag& tag = stream.tags[i];
    if (tag.channel > 3)
      return "invalid channel " + std::to_string(tag.channel) + " at index " +
             std::to_string(i);
    if (tag.t < 0) return "negative timestamp at index " + std::to_string(i);
    if (tag.t > stream.duration_ps)
      return "timestamp beyond duration at index " + std::to_string(i);
    if (i > 0 && tag.t < stream.tags[i - 1].t)
      return "out of order at index " + std::to_string(i);
  }
  return std::nullopt;
}

std::size_t write_tags(const TagStream& stream, std::ostream& out) {
  out.write(kMagic, 4);
  put_u16(out, kVersion);
  put_u16(out, kChannelCount);
  put_u64(out, stream.tags.size());
  for (const TimeTag& tag : stream.tags) {
    out.put(static_cast<char>(tag.channel));
    put_u64(out, static_cast<std::uint64_t>(tag.t));
  }
  if (!out) throw std::runtime_error("tag write failed");
  return 16 + 9 * stream.tags.size();
}

std::size_t write_tags_file(const TagStream& stream, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return write_tags(stream, out);
}

TagStream read_tags(std::istream& in, std::int64_t duration_ps) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("malformed tag header: bad magic");
  const std::uint16_t version = get_u16(in);
  if (version != kVersion)
    throw std::runtime_error("unsupported tag file version " + std::to_string(version));
  const std::uint16_t channels = get_u16(in);
  if (channels != kChannelCount)
    throw std::runtime_error("unexpected channel count " + std::to_string(channels));
  const std::uint64_t n = get_u64(in);
  if (!in) throw std::runtime_error("malformed tag header: truncated");

  TagStream stream;
  stream.tags.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    TimeTag tag;
    tag.channel = static_cast<std::uint8_t>(in.get());
    tag.t = static_cast<std::int64_t>(get_u64(in));
    if (!in) throw std::runtime_error("truncated tag record at index " + std::to_string(i));
    stream.tags.push_back(tag);
  }
  stream.duration_ps =
      duration_ps >= 0 ? duration_ps : (stream.tags.empty() ? 0 : stream.tags.back().t);
  return stream;
}

TagStream read_tags_file(const std::string& path, std::int64_t duration_ps) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_tags(in, duration_ps);
}

}  // namespace qtf
