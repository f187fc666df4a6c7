// Copyright 2026 The ionphoton Authors
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

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace ionphoton {

enum class Channel : std::uint8_t { kA = 0, kB = 1, kT = 2 };

inline char channel_letter(Channel c) { return c == Channel::kA ? 'A' : c == Channel::kB ? 'B' : 'T'; }

struct TagRecord {
  std::uint64_t timestamp_ps = 0;
  Channel channel = Channel::kT;

  friend bool operator==(const TagRecord&, const TagRecord&) = default;
};

struct TagStream {
  std::vector<TagRecord> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }

  /// Throws IntegrityError at the first out-of-order record (offset counted in
  /// TTAG bytes).
  void validate() const;
};

/// Consumers of tag blocks; blocks arrive in stream order.
class TagSink {
 public:
  virtual ~TagSink() = default;
  virtual void consume(std::span<const TagRecord> block) = 0;
  virtual void finish() {}
};

class CollectingSink : public TagSink {
 public:
  void consume(std::span<const TagRecord> block) override {
    stream.records.insert(stream.records.end(), block.begin(), block.end());
  }
  TagStream stream;
};

class FanoutSink : public TagSink {
 public:
  explicit FanoutSink(std::vector<TagSink*> sinks) : sinks_(std::move(sinks)) {}
  void consume(std::span<const TagRecord> block) override {
    for (auto* s : sinks_) s->consume(block);
  }
  void finish() override {
    for (auto* s : sinks_) s->finish();
  }

 private:
  std::vector<TagSink*> sinks_;
};

// ---------------------------------------------------------------------------
// TTAG: little-endian. Header "TTAG", u16 version (1), u16 reserved (0), u64
// record count. Records: u64 timestamp (ps), u8 channel, 7 zero bytes.

inline constexpr std::size_t kTtagHeaderSize = 16;
inline constexpr std::size_t kTtagRecordSize = 16;
inline constexpr std::uint16_t kTtagVersion = 1;

namespace detail {

inline void put_le(unsigned char* dst, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) dst[i] = static_cast<unsigned char>(v >> (8 * i));
}

inline std::uint64_t get_le(const unsigned char* src, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  return v;
}

inline std::array<unsigned char, kTtagHeaderSize> ttag_header(std::uint64_t count) {
  std::array<unsigned char, kTtagHeaderSize> h{};
  std::memcpy(h.data(), "TTAG", 4);
  put_le(h.data() + 4, kTtagVersion, 2);
  put_le(h.data() + 8, count, 8);
  return h;
}

/// Header check; returns the declared record count.
inline std::uint64_t check_ttag_header(const unsigned char* h, std::size_t available) {
  if (available < kTtagHeaderSize) throw FormatError("TTAG: truncated header");
  if (std::memcmp(h, "TTAG", 4) != 0) throw FormatError("TTAG: bad magic");
  const auto version = get_le(h + 4, 2);
  if (version != kTtagVersion) throw FormatError("TTAG: unsupported version " + std::to_string(version));
  if (get_le(h + 6, 2) != 0) throw FormatError("TTAG: reserved header field is not zero");
  return get_le(h + 8, 8);
}

inline TagRecord decode_record(const unsigned char* r, std::size_t offset) {
  const auto channel = r[8];
  if (channel > 2) throw FormatError("TTAG: invalid channel " + std::to_string(channel) + " at byte offset " +
                                     std::to_string(offset));
  for (int i = 9; i < 16; ++i)
    if (r[i] != 0) throw FormatError("TTAG: non-zero padding at byte offset " + std::to_string(offset));
  return {get_le(r, 8), static_cast<Channel>(channel)};
}

inline void encode_record(const TagRecord& t, unsigned char* r) {
  std::memset(r, 0, kTtagRecordSize);
  put_le(r, t.timestamp_ps, 8);
  r[8] = static_cast<unsigned char>(t.channel);
}

}  // namespace detail

inline void TagStream::validate() const {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp_ps < records[i - 1].timestamp_ps)
      throw IntegrityError("unsorted timestamps", kTtagHeaderSize + i * kTtagRecordSize);
  for (std::size_t i = 0; i < records.size(); ++i)
    if (static_cast<unsigned>(records[i].channel) > 2)
      throw IntegrityError("invalid channel", kTtagHeaderSize + i * kTtagRecordSize);
}

/// Parses a complete in-memory TTAG image.
inline TagStream parse_tags(std::span<const unsigned char> bytes) {
  const std::uint64_t count = detail::check_ttag_header(bytes.data(), bytes.size());
  const std::size_t body = bytes.size() - kTtagHeaderSize;
  if (body % kTtagRecordSize != 0 || body / kTtagRecordSize != count)
    throw FormatError("TTAG: header declares " + std::to_string(count) + " records but the body holds " +
                      std::to_string(body / kTtagRecordSize) + (body % kTtagRecordSize ? " and a partial record" : ""));
  TagStream s;
  s.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t off = kTtagHeaderSize + i * kTtagRecordSize;
    TagRecord t = detail::decode_record(bytes.data() + off, off);
    if (!s.records.empty() && t.timestamp_ps < s.records.back().timestamp_ps)
      throw IntegrityError("unsorted timestamps", off);
    s.records.push_back(t);
  }
  return s;
}

inline std::vector<unsigned char> serialize_tags(const TagStream& s) {
  std::vector<unsigned char> out(kTtagHeaderSize + s.records.size() * kTtagRecordSize);
  const auto h = detail::ttag_header(s.records.size());
  std::memcpy(out.data(), h.data(), h.size());
  for (std::size_t i = 0; i < s.records.size(); ++i)
    detail::encode_record(s.records[i], out.data() + kTtagHeaderSize + i * kTtagRecordSize);
  return out;
}

/// Streaming TTAG writer. The record count is patched into the header on
/// finish(), so the target must be seekable.
class TtagWriter : public TagSink {
 public:
  explicit TtagWriter(std::ostream& out) : out_(out) {
    const auto h = detail::ttag_header(0);
    out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
  }

  void consume(std::span<const TagRecord> block) override {
    buffer_.resize(block.size() * kTtagRecordSize);
    for (std::size_t i = 0; i < block.size(); ++i) detail::encode_record(block[i], buffer_.data() + i * kTtagRecordSize);
    out_.write(reinterpret_cast<const char*>(buffer_.data()), static_cast<std::streamsize>(buffer_.size()));
    count_ += block.size();
  }

  void finish() override {
    const auto end = out_.tellp();
    const auto h = detail::ttag_header(count_);
    out_.seekp(0);
    out_.write(reinterpret_cast<const char*>(h.data()), static_cast<std::streamsize>(h.size()));
    out_.seekp(end);
    out_.flush();
    if (!out_) throw FormatError("TTAG: write failed");
  }

  std::uint64_t count() const { return count_; }

 private:
  std::ostream& out_;
  std::vector<unsigned char> buffer_;
  std::uint64_t count_ = 0;
};

/// Streams a TTAG input into a sink in fixed-size blocks, with the same
/// checks as parse_tags.
inline std::uint64_t read_ttag(std::istream& in, TagSink& sink, std::size_t block_records = 1 << 16) {
  unsigned char header[kTtagHeaderSize];
  in.read(reinterpret_cast<char*>(header), kTtagHeaderSize);
  const std::uint64_t count = detail::check_ttag_header(header, static_cast<std::size_t>(in.gcount()));
  std::vector<unsigned char> raw(block_records * kTtagRecordSize);
  std::vector<TagRecord> block;
  block.reserve(block_records);
  std::uint64_t done = 0;
  std::uint64_t last = 0;
  while (done < count) {
    const std::size_t want = static_cast<std::size_t>(std::min<std::uint64_t>(block_records, count - done));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(want * kTtagRecordSize));
    if (static_cast<std::size_t>(in.gcount()) != want * kTtagRecordSize)
      throw FormatError("TTAG: truncated body after " + std::to_string(done) + " of " + std::to_string(count) +
                        " records");
    block.clear();
    for (std::size_t i = 0; i < want; ++i) {
      const std::size_t off = kTtagHeaderSize + (done + i) * kTtagRecordSize;
      TagRecord t = detail::decode_record(raw.data() + i * kTtagRecordSize, off);
      if (done + i > 0 && t.timestamp_ps < last) throw IntegrityError("unsorted timestamps", off);
      last = t.timestamp_ps;
      block.push_back(t);
    }
    sink.consume(block);
    done += want;
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("TTAG: trailing bytes after the declared records");
  sink.finish();
  return count;
}

// ---------------------------------------------------------------------------
// CSV alternative: "channel,timestamp_ps" per line, channel A|B|T or 0|1|2,
// optional header line and '#' comments.

inline TagStream parse_tags_csv(std::istream& in) {
  TagStream s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("tag CSV line " + std::to_string(line_no) + ": expected 2 fields");
    std::string ch = line.substr(0, comma), ts = line.substr(comma + 1);
    if (line_no == 1 && ch == "channel") continue;
    Channel c;
    if (ch == "A" || ch == "0") c = Channel::kA;
    else if (ch == "B" || ch == "1") c = Channel::kB;
    else if (ch == "T" || ch == "2") c = Channel::kT;
    else throw FormatError("tag CSV line " + std::to_string(line_no) + ": invalid channel '" + ch + "'");
    if (ts.empty() || ts.find_first_not_of("0123456789") != std::string::npos || ts.size() > 20)
      throw FormatError("tag CSV line " + std::to_string(line_no) + ": invalid timestamp '" + ts + "'");
    std::uint64_t value = 0;
    try {
      value = std::stoull(ts);
    } catch (const std::exception&) {
      throw FormatError("tag CSV line " + std::to_string(line_no) + ": timestamp out of range");
    }
    if (!s.records.empty() && value < s.records.back().timestamp_ps)
      throw IntegrityError("tag CSV line " + std::to_string(line_no) + ": unsorted timestamps", line_no);
    s.records.push_back({value, c});
  }
  return s;
}

inline void write_tags_csv(std::ostream& out, const TagStream& s) {
  out << "channel,timestamp_ps\n";
  for (const auto& t : s.records) out << channel_letter(t.channel) << ',' << t.timestamp_ps << '\n';
}

/// Reads a tag file, TTAG when it starts with the magic, CSV otherwise, and
/// streams it into the sink.
inline std::uint64_t read_tag_file(const std::string& path, TagSink& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open tag file " + path);
  char magic[4] = {};
  in.read(magic, 4);
  const auto got = in.gcount();
  in.clear();
  in.seekg(0);
  if (got == 4 && std::memcmp(magic, "TTAG", 4) == 0) return read_ttag(in, sink);
  if (got > 0 && got < 4 && std::string_view(magic, static_cast<std::size_t>(got)) == std::string_view("TTAG", got))
    throw FormatError("TTAG: truncated header");
  TagStream s = parse_tags_csv(in);
  sink.consume(s.records);
  sink.finish();
  return s.records.size();
}

}  // namespace ionphoton
