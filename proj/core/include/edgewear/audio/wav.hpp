#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "edgewear/audio/pcm.hpp"

namespace edgewear::audio {

struct WavReadOptions {
  /// Stereo input is rejected unless this is set, in which case the two
  /// channels are averaged into a mono buffer.
  bool downmix_stereo = false;
};

/// Parses a RIFF/WAVE PCM 16-bit little-endian file image.
/// Throws FormatError on anything else (compressed, 8/24-bit, truncated).
PcmBuffer parse_wav(std::span<const uint8_t> bytes, const WavReadOptions& opts = {});
std::vector<uint8_t> serialize_wav(const PcmBuffer& pcm);

PcmBuffer read_wav(const std::filesystem::path& path, const WavReadOptions& opts = {});
void write_wav(const PcmBuffer& pcm, const std::filesystem::path& path);

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const uint8_t> bytes);

}  // namespace edgewear::audio
