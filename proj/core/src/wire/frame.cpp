#include "edgewear/wire/frame.hpp"

#include <string>

#include <zlib.h>

#include "edgewear/bytes.hpp"

namespace edgewear::wire {

std::string_view frame_type_name(FrameType t) {
  switch (t) {
    case FrameType::HELLO: return "HELLO";
    case FrameType::PROVISION: return "PROVISION";
    case FrameType::PROVISION_ACK: return "PROVISION_ACK";
    case FrameType::AUDIO_CHUNK: return "AUDIO_CHUNK";
    case FrameType::PHOTO_META: return "PHOTO_META";
    case FrameType::PHOTO_DATA: return "PHOTO_DATA";
    case FrameType::CONTROL: return "CONTROL";
    case FrameType::RESPONSE_AUDIO: return "RESPONSE_AUDIO";
    case FrameType::END_OF_UTTERANCE: return "END_OF_UTTERANCE";
    case FrameType::END_OF_RESPONSE: return "END_OF_RESPONSE";
    case FrameType::PING: return "PING";
    case FrameType::ERROR: return "ERROR";
  }
  return "?";
}

std::optional<FrameType> frame_type_from_byte(uint8_t b) {
  if (b >= 1 && b <= 12) return static_cast<FrameType>(b);
  return std::nullopt;
}

std::string_view frame_error_name(FrameErrorKind k) {
  switch (k) {
    case FrameErrorKind::BadMagic: return "bad magic";
    case FrameErrorKind::BadCrc: return "bad crc";
    case FrameErrorKind::Truncated: return "truncated";
    case FrameErrorKind::UnknownType: return "unknown type";
    case FrameErrorKind::TrailingBytes: return "trailing bytes";
  }
  return "?";
}

FrameError::FrameError(FrameErrorKind kind, const std::string& detail)
    : FormatError("frame: " + std::string(frame_error_name(kind)) + (detail.empty() ? "" : " (" + detail + ")")),
      kind_(kind) {}

uint32_t crc32_ieee(std::span<const uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; frames are far below that limit.
  crc = ::crc32(crc, data.data(), static_cast<uInt>(data.size()));
  return static_cast<uint32_t>(crc);
}

std::vector<uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxPayloadBytes) {
    throw InputError("frame: payload of " + std::to_string(f.payload.size()) + " bytes exceeds 65535");
  }
  ByteWriter w;
  w.u8(kMagic0);
  w.u8(kMagic1);
  w.u8(static_cast<uint8_t>(f.type));
  w.u32(f.seq);
  w.u16(static_cast<uint16_t>(f.payload.size()));
  w.bytes(f.payload);
  w.u32(crc32_ieee(w.data()));
  return w.take();
}

namespace {

// Total wire size of the frame starting at bytes[0], once the header is in.
std::size_t frame_size(std::span<const uint8_t> bytes) {
  return kFrameOverheadBytes + (static_cast<std::size_t>(bytes[7]) | (static_cast<std::size_t>(bytes[8]) << 8));
}

void check_magic(std::span<const uint8_t> bytes) {
  if (bytes.size() >= 1 && bytes[0] != kMagic0) throw FrameError(FrameErrorKind::BadMagic, "");
  if (bytes.size() >= 2 && bytes[1] != kMagic1) throw FrameError(FrameErrorKind::BadMagic, "");
}

}  // namespace

Frame decode_frame(std::span<const uint8_t> bytes) {
  check_magic(bytes);
  if (bytes.size() < kFrameHeaderBytes) {
    throw FrameError(FrameErrorKind::Truncated, std::to_string(bytes.size()) + " bytes");
  }
  const auto total = frame_size(bytes);
  if (bytes.size() < total) {
    throw FrameError(FrameErrorKind::Truncated, "need " + std::to_string(total) + ", have " + std::to_string(bytes.size()));
  }
  if (bytes.size() > total) throw FrameError(FrameErrorKind::TrailingBytes, std::to_string(bytes.size() - total));

  ByteReader r(bytes.subspan(total - 4), "frame");
  const uint32_t crc = r.u32();
  if (crc != crc32_ieee(bytes.first(total - 4))) throw FrameError(FrameErrorKind::BadCrc, "");

  const auto type = frame_type_from_byte(bytes[2]);
  if (!type) throw FrameError(FrameErrorKind::UnknownType, std::to_string(bytes[2]));
  Frame f;
  f.type = *type;
  ByteReader h(bytes.subspan(3, 4), "frame");
  f.seq = h.u32();
  f.payload.assign(bytes.begin() + kFrameHeaderBytes, bytes.begin() + static_cast<long>(total - 4));
  return f;
}

void FrameReader::feed(std::span<const uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

std::optional<Frame> FrameReader::next() {
  if (buf_.empty()) return std::nullopt;
  try {
    check_magic(std::span<const uint8_t>(buf_).first(std::min<std::size_t>(2, buf_.size())));
  } catch (const FrameError&) {
    buf_.erase(buf_.begin());
    throw;
  }
  if (buf_.size() < kFrameHeaderBytes) return std::nullopt;
  const auto total = frame_size(buf_);
  if (buf_.size() < total) return std::nullopt;
  std::vector<uint8_t> one(buf_.begin(), buf_.begin() + static_cast<long>(total));
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(total));
  return decode_frame(one);
}

}  // namespace edgewear::wire
