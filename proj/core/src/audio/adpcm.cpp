#include "edgewear/audio/adpcm.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <string>

namespace edgewear::audio {
namespace {

constexpr std::array<int8_t, 16> kIndexAdjust = {
    -1, -1, -1, -1, 2, 4, 6, 8,
    -1, -1, -1, -1, 2, 4, 6, 8,
};

constexpr std::array<int16_t, 89> kStepTable = {
    7,     8,     9,     10,    11,    12,    13,    14,    16,    17,
    19,    21,    23,    25,    28,    31,    34,    37,    41,    45,
    50,    55,    60,    66,    73,    80,    88,    97,    107,   118,
    130,   143,   157,   173,   190,   209,   230,   253,   279,   307,
    337,   371,   408,   449,   494,   544,   598,   658,   724,   796,
    876,   963,   1060,  1166,  1282,  1411,  1552,  1707,  1878,  2066,
    2272,  2499,  2749,  3024,  3327,  3660,  4026,  4428,  4871,  5358,
    5894,  6484,  7132,  7845,  8630,  9493,  10442, 11487, 12635, 13899,
    15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767,
};

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}
uint16_t get_u16(std::span<const uint8_t> b, std::size_t at) {
  return static_cast<uint16_t>(b[at] | (b[at + 1] << 8));
}
uint32_t get_u32(std::span<const uint8_t> b, std::size_t at) {
  return static_cast<uint32_t>(b[at]) | (static_cast<uint32_t>(b[at + 1]) << 8) |
         (static_cast<uint32_t>(b[at + 2]) << 16) | (static_cast<uint32_t>(b[at + 3]) << 24);
}

}  // namespace

int adpcm_step_size(int step_index) {
  return kStepTable.at(static_cast<std::size_t>(std::clamp(step_index, 0, kMaxStepIndex)));
}

uint8_t adpcm_encode_sample(AdpcmState& state, int16_t sample) {
  int step = kStepTable[static_cast<std::size_t>(state.step_index)];
  int diff = static_cast<int>(sample) - state.predictor;
  uint8_t code = 0;
  if (diff < 0) {
    code = 8;
    diff = -diff;
  }
  int delta = step >> 3;
  if (diff >= step) {
    code |= 4;
    diff -= step;
    delta += step;
  }
  step >>= 1;
  if (diff >= step) {
    code |= 2;
    diff -= step;
    delta += step;
  }
  step >>= 1;
  if (diff >= step) {
    code |= 1;
    delta += step;
  }
  state.predictor += (code & 8) ? -delta : delta;
  state.predictor = std::clamp(state.predictor, -32768, 32767);
  state.step_index = std::clamp(state.step_index + kIndexAdjust[code], 0, kMaxStepIndex);
  return code;
}

int16_t adpcm_decode_sample(AdpcmState& state, uint8_t code) {
  const int step = kStepTable[static_cast<std::size_t>(state.step_index)];
  int delta = step >> 3;
  if (code & 4) delta += step;
  if (code & 2) delta += step >> 1;
  if (code & 1) delta += step >> 2;
  state.predictor += (code & 8) ? -delta : delta;
  state.predictor = std::clamp(state.predictor, -32768, 32767);
  state.step_index = std::clamp(state.step_index + kIndexAdjust[code & 0x0F], 0, kMaxStepIndex);
  return static_cast<int16_t>(state.predictor);
}

AdpcmBlock AdpcmEncoder::encode_block(std::span<const int16_t> samples) {
  AdpcmBlock block;
  block.predictor = static_cast<int16_t>(state_.predictor);
  block.step_index = static_cast<uint8_t>(state_.step_index);
  block.sample_count = samples.size();
  block.nibbles.assign(adpcm_payload_bytes(samples.size()), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const uint8_t code = adpcm_encode_sample(state_, samples[i]);
    block.nibbles[i / 2] |= (i % 2 == 0) ? code : static_cast<uint8_t>(code << 4);
  }
  return block;
}

std::vector<AdpcmBlock> adpcm_encode(const PcmBuffer& pcm, std::size_t block_samples) {
  if (pcm.channels != 1) throw InputError("adpcm_encode: expected mono PCM, got " + std::to_string(pcm.channels) + " channels");
  if (block_samples == 0) throw ConfigError("adpcm_encode: block size must be positive");
  std::vector<AdpcmBlock> blocks;
  blocks.reserve((pcm.samples.size() + block_samples - 1) / block_samples);
  AdpcmEncoder encoder;
  const std::span<const int16_t> all(pcm.samples);
  for (std::size_t at = 0; at < all.size(); at += block_samples) {
    blocks.push_back(encoder.encode_block(all.subspan(at, std::min(block_samples, all.size() - at))));
  }
  return blocks;
}

std::vector<int16_t> adpcm_decode_block(const AdpcmBlock& block) {
  if (block.step_index > kMaxStepIndex) {
    throw CorruptBlockError("adpcm block has step_index " + std::to_string(block.step_index) + " (max 88)");
  }
  if (block.nibbles.size() < adpcm_payload_bytes(block.sample_count)) {
    throw CorruptBlockError("adpcm block payload shorter than its sample count");
  }
  AdpcmState state{block.predictor, block.step_index};
  std::vector<int16_t> out(block.sample_count);
  for (std::size_t i = 0; i < block.sample_count; ++i) {
    const uint8_t byte = block.nibbles[i / 2];
    const uint8_t code = (i % 2 == 0) ? (byte & 0x0F) : (byte >> 4);
    out[i] = adpcm_decode_sample(state, code);
  }
  return out;
}

PcmBuffer adpcm_decode(std::span<const AdpcmBlock> blocks, int sample_rate_hz) {
  PcmBuffer pcm;
  pcm.sample_rate_hz = sample_rate_hz;
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.sample_count;
  pcm.samples.reserve(total);
  for (const auto& b : blocks) {
    const auto decoded = adpcm_decode_block(b);
    pcm.samples.insert(pcm.samples.end(), decoded.begin(), decoded.end());
  }
  return pcm;
}

std::vector<uint8_t> serialize_block(const AdpcmBlock& block) {
  std::vector<uint8_t> out;
  out.reserve(kAdpcmHeaderBytes + block.nibbles.size());
  put_u16(out, static_cast<uint16_t>(block.predictor));
  out.push_back(block.step_index);
  out.push_back(0);
  out.insert(out.end(), block.nibbles.begin(), block.nibbles.end());
  return out;
}

AdpcmBlock parse_block(std::span<const uint8_t> bytes, std::size_t sample_count) {
  const std::size_t need = kAdpcmHeaderBytes + adpcm_payload_bytes(sample_count);
  if (bytes.size() < need) throw CorruptBlockError("adpcm block truncated");
  AdpcmBlock block;
  block.predictor = static_cast<int16_t>(get_u16(bytes, 0));
  block.step_index = bytes[2];
  if (block.step_index > kMaxStepIndex) {
    throw CorruptBlockError("adpcm block has step_index " + std::to_string(block.step_index) + " (max 88)");
  }
  block.sample_count = sample_count;
  block.nibbles.assign(bytes.begin() + kAdpcmHeaderBytes, bytes.begin() + static_cast<std::ptrdiff_t>(need));
  return block;
}

std::vector<uint8_t> write_ima_stream(const PcmBuffer& pcm, std::size_t block_samples) {
  if (block_samples == 0 || block_samples > 0xFFFF) throw ConfigError("ima stream: block size must be in [1, 65535]");
  const auto blocks = adpcm_encode(pcm, block_samples);
  std::vector<uint8_t> out = {'I', 'M', 'A', '1'};
  put_u32(out, static_cast<uint32_t>(pcm.sample_rate_hz));
  put_u32(out, static_cast<uint32_t>(pcm.samples.size()));
  put_u16(out, static_cast<uint16_t>(block_samples));
  put_u16(out, 0);
  for (const auto& b : blocks) {
    const auto bytes = serialize_block(b);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

PcmBuffer read_ima_stream(std::span<const uint8_t> bytes) {
  if (bytes.size() < kImaFileHeaderBytes || std::memcmp(bytes.data(), "IMA1", 4) != 0) {
    throw FormatError("not an IMA1 stream");
  }
  const auto rate = get_u32(bytes, 4);
  const auto count = get_u32(bytes, 8);
  const auto block_samples = get_u16(bytes, 12);
  if (rate == 0 || block_samples == 0) throw FormatError("IMA1 stream has zero rate or block size");
  std::vector<AdpcmBlock> blocks;
  std::size_t at = kImaFileHeaderBytes;
  for (std::size_t remaining = count; remaining > 0;) {
    const std::size_t n = std::min<std::size_t>(remaining, block_samples);
    const std::size_t size = kAdpcmHeaderBytes + adpcm_payload_bytes(n);
    if (at + size > bytes.size()) throw FormatError("IMA1 stream truncated");
    blocks.push_back(parse_block(bytes.subspan(at, size), n));
    at += size;
    remaining -= n;
  }
  return adpcm_decode(blocks, static_cast<int>(rate));
}

}  // namespace edgewear::audio
