#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edgewear/audio/pcm.hpp"
#include "edgewear/error.hpp"

namespace edgewear::audio {

/// One independently decodable IMA-ADPCM block.
///
/// The header carries the encoder state at the start of the block, so blocks
/// can be decoded in any order and a lost block does not poison later ones.
struct AdpcmBlock {
  int16_t predictor = 0;
  uint8_t step_index = 0;
  std::vector<uint8_t> nibbles;  // two codes per byte, low nibble first
  std::size_t sample_count = 0;

  bool operator==(const AdpcmBlock&) const = default;
};

inline constexpr std::size_t kAdpcmHeaderBytes = 4;
inline constexpr int kMaxStepIndex = 88;

class CorruptBlockError : public Error {
 public:
  using Error::Error;
};

/// Encoder state carried between blocks.
struct AdpcmState {
  int predictor = 0;
  int step_index = 0;
};

/// Encodes a single sample, updating `state`. Returns the 4-bit code.
uint8_t adpcm_encode_sample(AdpcmState& state, int16_t sample);
/// Decodes a single 4-bit code, updating `state`.
int16_t adpcm_decode_sample(AdpcmState& state, uint8_t code);
/// Current quantizer step for a given index (standard 89-entry table).
int adpcm_step_size(int step_index);

/// Splits mono PCM into blocks of `block_samples` (last block may be short).
/// Throws InputError for non-mono input.
std::vector<AdpcmBlock> adpcm_encode(const PcmBuffer& pcm, std::size_t block_samples = kChunkSamples);

/// Stateful encoder for streaming producers; state persists across calls.
class AdpcmEncoder {
 public:
  AdpcmBlock encode_block(std::span<const int16_t> samples);
  const AdpcmState& state() const { return state_; }

 private:
  AdpcmState state_;
};

PcmBuffer adpcm_decode(std::span<const AdpcmBlock> blocks, int sample_rate_hz = kCanonicalRateHz);
std::vector<int16_t> adpcm_decode_block(const AdpcmBlock& block);

/// Number of nibble payload bytes for `sample_count` samples.
constexpr std::size_t adpcm_payload_bytes(std::size_t sample_count) { return (sample_count + 1) / 2; }

/// Wire layout: [predictor i16 LE][step_index u8][reserved u8][nibbles...].
std::vector<uint8_t> serialize_block(const AdpcmBlock& block);
/// Parses a block; `sample_count` is carried out of band (chunk/file header).
AdpcmBlock parse_block(std::span<const uint8_t> bytes, std::size_t sample_count);

// --- .ima container used by `codec encode/decode` ---------------------------
// [magic "IMA1"][sample_rate u32][sample_count u32][block_samples u16][reserved u16]
// followed by serialized blocks back to back.
inline constexpr std::size_t kImaFileHeaderBytes = 16;

std::vector<uint8_t> write_ima_stream(const PcmBuffer& pcm, std::size_t block_samples = kChunkSamples);
PcmBuffer read_ima_stream(std::span<const uint8_t> bytes);

}  // namespace edgewear::audio
