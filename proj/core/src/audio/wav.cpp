#include "edgewear/audio/wav.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "edgewear/error.hpp"

namespace edgewear::audio {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t le16(std::span<const uint8_t> b, std::size_t at) { return static_cast<uint16_t>(b[at] | (b[at + 1] << 8)); }
uint32_t le32(std::span<const uint8_t> b, std::size_t at) {
  return static_cast<uint32_t>(b[at]) | (static_cast<uint32_t>(b[at + 1]) << 8) |
         (static_cast<uint32_t>(b[at + 2]) << 16) | (static_cast<uint32_t>(b[at + 3]) << 24);
}
void put16(std::vector<uint8_t>& o, uint16_t v) {
  o.push_back(static_cast<uint8_t>(v));
  o.push_back(static_cast<uint8_t>(v >> 8));
}
void put32(std::vector<uint8_t>& o, uint32_t v) {
  for (int i = 0; i < 4; ++i) o.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void put_tag(std::vector<uint8_t>& o, const char* tag) { o.insert(o.end(), tag, tag + 4); }

struct FmtChunk {
  uint16_t format;
  uint16_t channels;
  uint32_t rate;
  uint16_t bits;
};

}  // namespace

PcmBuffer parse_wav(std::span<const uint8_t> bytes, const WavReadOptions& opts) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("wav: missing RIFF/WAVE header");
  }
  std::optional<FmtChunk> fmt;
  std::optional<std::span<const uint8_t>> data;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const uint32_t size = le32(bytes, at + 4);
    const std::size_t body = at + 8;
    if (body + size > bytes.size()) throw FormatError("wav: truncated chunk");
    if (std::memcmp(bytes.data() + at, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("wav: fmt chunk too short");
      fmt = FmtChunk{le16(bytes, body), le16(bytes, body + 2), le32(bytes, body + 4), le16(bytes, body + 14)};
      if (fmt->format == kFormatExtensible && size >= 26) fmt->format = le16(bytes, body + 24);
    } else if (std::memcmp(bytes.data() + at, "data", 4) == 0) {
      data = bytes.subspan(body, size);
    }
    at = body + size + (size & 1);
  }
  if (!fmt) throw FormatError("wav: no fmt chunk");
  if (!data) throw FormatError("wav: no data chunk");
  if (fmt->format != kFormatPcm) throw FormatError("wav: unsupported format tag " + std::to_string(fmt->format) + " (PCM only)");
  if (fmt->bits != 16) throw FormatError("wav: only 16-bit samples supported, got " + std::to_string(fmt->bits));
  if (fmt->rate == 0) throw FormatError("wav: zero sample rate");
  if (fmt->channels == 0 || fmt->channels > 2) throw FormatError("wav: unsupported channel count " + std::to_string(fmt->channels));

  const std::size_t n = data->size() / 2;
  std::vector<int16_t> interleaved(n);
  for (std::size_t i = 0; i < n; ++i) interleaved[i] = static_cast<int16_t>(le16(*data, 2 * i));

  PcmBuffer pcm;
  pcm.sample_rate_hz = static_cast<int>(fmt->rate);
  if (fmt->channels == 1) {
    pcm.samples = std::move(interleaved);
    return pcm;
  }
  if (!opts.downmix_stereo) throw FormatError("wav: stereo input rejected (enable downmix to accept)");
  pcm.samples.resize(n / 2);
  for (std::size_t i = 0; i < n / 2; ++i) {
    // Arithmetic shift keeps the average inside int16 range.
    pcm.samples[i] = static_cast<int16_t>((static_cast<int>(interleaved[2 * i]) + interleaved[2 * i + 1]) >> 1);
  }
  return pcm;
}

std::vector<uint8_t> serialize_wav(const PcmBuffer& pcm) {
  if (pcm.channels < 1 || pcm.sample_rate_hz <= 0) throw InputError("wav: invalid buffer");
  const auto data_bytes = static_cast<uint32_t>(pcm.samples.size() * 2);
  const auto block_align = static_cast<uint16_t>(2 * pcm.channels);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, static_cast<uint16_t>(pcm.channels));
  put32(out, static_cast<uint32_t>(pcm.sample_rate_hz));
  put32(out, static_cast<uint32_t>(pcm.sample_rate_hz) * block_align);
  put16(out, block_align);
  put16(out, 16);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (int16_t s : pcm.samples) put16(out, static_cast<uint16_t>(s));
  return out;
}

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

PcmBuffer read_wav(const std::filesystem::path& path, const WavReadOptions& opts) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_wav(bytes, opts);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_wav(const PcmBuffer& pcm, const std::filesystem::path& path) { write_file_bytes(path, serialize_wav(pcm)); }

}  // namespace edgewear::audio
