#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qtf {

// Detector channels. A = signal party, B = idler party; T = time arm of the
// 50:50 splitter, F = frequency (filter) arm.
enum Channel : std::uint8_t {
  kChannelAT = 0,
  kChannelAF = 1,
  kChannelBT = 2,
  kChannelBF = 3,
};

/// One detection event: channel id plus integer-picosecond timestamp.
struct TimeTag {
  std::uint8_t channel = 0;
  std::int64_t t = 0;  // picoseconds since run start

  friend bool operator==(const TimeTag& a, const TimeTag& b) {
    return a.channel == b.channel && a.t == b.t;
  }
};

/// Time-ordered detection record of one detector over one run.
struct TagStream {
  std::vector<TimeTag> tags;       // sorted non-decreasing by t
  std::int64_t duration_ps = 0;    // run length; every tag.t <= duration_ps

  friend bool operator==(const TagStream& a, const TagStream& b) {
    return a.duration_ps == b.duration_ps && a.tags == b.tags;
  }
};

/// Time-frame discretization: n_bins consecutive bins of width tau_ps.
/// Frame k covers [k*n_bins*tau_ps, (k+1)*n_bins*tau_ps).
struct FrameSpec {
  std::int64_t tau_ps = 0;
  int n_bins = 0;

  std::int64_t frame_length_ps() const {
    return tau_ps * static_cast<std::int64_t>(n_bins);
  }
};

/// Returns std::nullopt if the stream satisfies all invariants, otherwise a
/// description naming the first offending tag index.
std::optional<std::string> validate_stream(const TagStream& stream);

// Binary tag file, all integers little-endian.
// Header (16 bytes): magic "QTAG", version u16, channel-count u16,
// record-count u64. Records (9 bytes each): channel u8, timestamp u64 ps.
// The run duration is metadata of the stream, not of the file; read_tags
// infers it from the last tag unless the caller passes it explicitly.
std::size_t write_tags(const TagStream& stream, std::ostream& out);
std::size_t write_tags_file(const TagStream& stream, const std::string& path);
TagStream read_tags(std::istream& in, std::int64_t duration_ps = -1);
TagStream read_tags_file(const std::string& path, std::int64_t duration_ps = -1);

}  // namespace qtf
