#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "edgewear/error.hpp"

namespace edgewear::wire {

enum class FrameType : uint8_t {
  HELLO = 1,
  PROVISION = 2,
  PROVISION_ACK = 3,
  AUDIO_CHUNK = 4,
  PHOTO_META = 5,
  PHOTO_DATA = 6,
  CONTROL = 7,
  RESPONSE_AUDIO = 8,
  END_OF_UTTERANCE = 9,
  END_OF_RESPONSE = 10,
  PING = 11,
  ERROR = 12,
};

inline constexpr FrameType kAllFrameTypes[] = {
    FrameType::HELLO,          FrameType::PROVISION,        FrameType::PROVISION_ACK,   FrameType::AUDIO_CHUNK,
    FrameType::PHOTO_META,     FrameType::PHOTO_DATA,       FrameType::CONTROL,         FrameType::RESPONSE_AUDIO,
    FrameType::END_OF_UTTERANCE, FrameType::END_OF_RESPONSE, FrameType::PING,           FrameType::ERROR};

std::string_view frame_type_name(FrameType t);
std::optional<FrameType> frame_type_from_byte(uint8_t b);

struct Frame {
  FrameType type = FrameType::PING;
  uint32_t seq = 0;
  std::vector<uint8_t> payload;

  bool operator==(const Frame&) const = default;
};

inline constexpr uint8_t kMagic0 = 0xED;
inline constexpr uint8_t kMagic1 = 0x01;
inline constexpr std::size_t kFrameHeaderBytes = 9;  // magic(2) type(1) seq(4) len(2)
inline constexpr std::size_t kFrameOverheadBytes = kFrameHeaderBytes + 4;
inline constexpr std::size_t kMaxPayloadBytes = 65535;

enum class FrameErrorKind { BadMagic, BadCrc, Truncated, UnknownType, TrailingBytes };

std::string_view frame_error_name(FrameErrorKind k);

class FrameError : public FormatError {
 public:
  FrameError(FrameErrorKind kind, const std::string& detail);
  FrameErrorKind kind() const { return kind_; }

 private:
  FrameErrorKind kind_;
};

/// IEEE 802.3 CRC-32 (zlib polynomial).
uint32_t crc32_ieee(std::span<const uint8_t> data);

/// Throws InputError if the payload exceeds 65535 bytes.
std::vector<uint8_t> encode_frame(const Frame& f);
/// Decodes exactly one frame occupying all of `bytes`.
Frame decode_frame(std::span<const uint8_t> bytes);

/// Incremental decoder for byte streams (TCP demo, fuzzing).
class FrameReader {
 public:
  void feed(std::span<const uint8_t> bytes);
  /// Next complete frame, or nullopt if more bytes are needed. A corrupt
  /// frame throws FrameError and is discarded.
  std::optional<Frame> next();
  std::size_t buffered() const { return buf_.size(); }

 private:
  std::vector<uint8_t> buf_;
};

}  // namespace edgewear::wire
