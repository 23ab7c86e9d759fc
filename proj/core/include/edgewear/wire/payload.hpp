#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/wire/frame.hpp"

namespace edgewear::wire {

// Typed payloads carried inside frames. All little-endian; strings are
// u16-length-prefixed UTF-8.

/// AUDIO_CHUNK / RESPONSE_AUDIO: [sample_count u16][ADPCM block].
struct AudioChunk {
  uint32_t seq = 0;
  audio::AdpcmBlock block;

  bool operator==(const AudioChunk&) const = default;
};

std::vector<uint8_t> encode_audio_payload(const audio::AdpcmBlock& block);
audio::AdpcmBlock decode_audio_payload(std::span<const uint8_t> payload);
Frame audio_frame(FrameType type, const AudioChunk& chunk);
AudioChunk audio_chunk_from_frame(const Frame& f);

/// Splits PCM into 320-sample chunks with consecutive seq numbers starting
/// at `first_seq`; encoder state carries across chunks.
std::vector<AudioChunk> chunk_audio(const audio::PcmBuffer& pcm, uint32_t first_seq = 0);

/// PROVISION: network name plus an opaque credential blob.
struct Credentials {
  std::string network;
  std::vector<uint8_t> secret;

  bool operator==(const Credentials&) const = default;
};
std::vector<uint8_t> encode_credentials(const Credentials& c);
Credentials decode_credentials(std::span<const uint8_t> payload);

/// HELLO: device id and whether it is resuming an existing session.
struct Hello {
  std::string device_id;
  bool resume = false;

  bool operator==(const Hello&) const = default;
};
std::vector<uint8_t> encode_hello(const Hello& h);
Hello decode_hello(std::span<const uint8_t> payload);

enum class ControlCode : uint8_t { capture_photo = 1, endpoint = 2, cancel = 3, device_command = 4 };

struct Control {
  ControlCode code = ControlCode::capture_photo;
  std::string argument;

  bool operator==(const Control&) const = default;
};
std::vector<uint8_t> encode_control(const Control& c);
Control decode_control(std::span<const uint8_t> payload);

struct PhotoMeta {
  uint32_t photo_id = 0;
  uint16_t width = 0;
  uint16_t height = 0;
  uint32_t total_bytes = 0;
  std::string name;

  bool operator==(const PhotoMeta&) const = default;
};
std::vector<uint8_t> encode_photo_meta(const PhotoMeta& m);
PhotoMeta decode_photo_meta(std::span<const uint8_t> payload);

/// PHOTO_DATA: [photo_id u32][offset u32][bytes...].
struct PhotoData {
  uint32_t photo_id = 0;
  uint32_t offset = 0;
  std::vector<uint8_t> bytes;

  bool operator==(const PhotoData&) const = default;
};
std::vector<uint8_t> encode_photo_data(const PhotoData& d);
PhotoData decode_photo_data(std::span<const uint8_t> payload);

enum class ErrorCode : uint8_t { illegal_transition = 1, bad_frame = 2, timeout = 3, missing_photo = 4 };

struct ErrorInfo {
  ErrorCode code = ErrorCode::illegal_transition;
  uint8_t offending_type = 0;
  std::string message;

  bool operator==(const ErrorInfo&) const = default;
};
std::vector<uint8_t> encode_error(const ErrorInfo& e);
ErrorInfo decode_error(std::span<const uint8_t> payload);

}  // namespace edgewear::wire
