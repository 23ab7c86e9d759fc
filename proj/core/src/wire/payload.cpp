#include "edgewear/wire/payload.hpp"

#include "edgewear/bytes.hpp"

namespace edgewear::wire {

namespace {

void put_string(ByteWriter& w, const std::string& s) {
  if (s.size() > 0xFFFF) throw InputError("payload: string too long");
  w.u16(static_cast<uint16_t>(s.size()));
  w.bytes(std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

std::string get_string(ByteReader& r) {
  const auto n = r.u16();
  const auto b = r.bytes(n);
  return std::string(b.begin(), b.end());
}

void expect_end(const ByteReader& r, const char* what) {
  if (r.remaining() != 0) throw FormatError(std::string(what) + ": trailing bytes");
}

}  // namespace

std::vector<uint8_t> encode_audio_payload(const audio::AdpcmBlock& block) {
  if (block.sample_count > 0xFFFF) throw InputError("audio payload: block too long");
  ByteWriter w;
  w.u16(static_cast<uint16_t>(block.sample_count));
  w.bytes(audio::serialize_block(block));
  return w.take();
}

audio::AdpcmBlock decode_audio_payload(std::span<const uint8_t> payload) {
  ByteReader r(payload, "audio payload");
  const auto count = r.u16();
  const auto body = r.bytes(r.remaining());
  if (body.size() != audio::kAdpcmHeaderBytes + audio::adpcm_payload_bytes(count)) {
    throw FormatError("audio payload: length does not match sample count");
  }
  return audio::parse_block(body, count);
}

Frame audio_frame(FrameType type, const AudioChunk& chunk) {
  return Frame{type, chunk.seq, encode_audio_payload(chunk.block)};
}

AudioChunk audio_chunk_from_frame(const Frame& f) {
  if (f.type != FrameType::AUDIO_CHUNK && f.type != FrameType::RESPONSE_AUDIO) {
    throw InputError("audio chunk: wrong frame type " + std::string(frame_type_name(f.type)));
  }
  return AudioChunk{f.seq, decode_audio_payload(f.payload)};
}

std::vector<AudioChunk> chunk_audio(const audio::PcmBuffer& pcm, uint32_t first_seq) {
  std::vector<AudioChunk> out;
  auto seq = first_seq;
  for (auto& b : audio::adpcm_encode(pcm, audio::kChunkSamples)) out.push_back({seq++, std::move(b)});
  return out;
}

std::vector<uint8_t> encode_credentials(const Credentials& c) {
  ByteWriter w;
  put_string(w, c.network);
  if (c.secret.size() > 0xFFFF) throw InputError("credentials: secret too long");
  w.u16(static_cast<uint16_t>(c.secret.size()));
  w.bytes(c.secret);
  return w.take();
}

Credentials decode_credentials(std::span<const uint8_t> payload) {
  ByteReader r(payload, "credentials");
  Credentials c;
  c.network = get_string(r);
  const auto n = r.u16();
  const auto s = r.bytes(n);
  c.secret.assign(s.begin(), s.end());
  expect_end(r, "credentials");
  return c;
}

std::vector<uint8_t> encode_hello(const Hello& h) {
  ByteWriter w;
  put_string(w, h.device_id);
  w.u8(h.resume ? 1 : 0);
  return w.take();
}

Hello decode_hello(std::span<const uint8_t> payload) {
  ByteReader r(payload, "hello");
  Hello h;
  h.device_id = get_string(r);
  h.resume = r.u8() != 0;
  expect_end(r, "hello");
  return h;
}

std::vector<uint8_t> encode_control(const Control& c) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(c.code));
  put_string(w, c.argument);
  return w.take();
}

Control decode_control(std::span<const uint8_t> payload) {
  ByteReader r(payload, "control");
  Control c;
  const auto code = r.u8();
  if (code < 1 || code > 4) throw FormatError("control: unknown code " + std::to_string(code));
  c.code = static_cast<ControlCode>(code);
  c.argument = get_string(r);
  expect_end(r, "control");
  return c;
}

std::vector<uint8_t> encode_photo_meta(const PhotoMeta& m) {
  ByteWriter w;
  w.u32(m.photo_id);
  w.u16(m.width);
  w.u16(m.height);
  w.u32(m.total_bytes);
  put_string(w, m.name);
  return w.take();
}

PhotoMeta decode_photo_meta(std::span<const uint8_t> payload) {
  ByteReader r(payload, "photo meta");
  PhotoMeta m;
  m.photo_id = r.u32();
  m.width = r.u16();
  m.height = r.u16();
  m.total_bytes = r.u32();
  m.name = get_string(r);
  expect_end(r, "photo meta");
  return m;
}

std::vector<uint8_t> encode_photo_data(const PhotoData& d) {
  ByteWriter w;
  w.u32(d.photo_id);
  w.u32(d.offset);
  w.bytes(d.bytes);
  return w.take();
}

PhotoData decode_photo_data(std::span<const uint8_t> payload) {
  ByteReader r(payload, "photo data");
  PhotoData d;
  d.photo_id = r.u32();
  d.offset = r.u32();
  const auto b = r.bytes(r.remaining());
  d.bytes.assign(b.begin(), b.end());
  return d;
}

std::vector<uint8_t> encode_error(const ErrorInfo& e) {
  ByteWriter w;
  w.u8(static_cast<uint8_t>(e.code));
  w.u8(e.offending_type);
  put_string(w, e.message);
  return w.take();
}

ErrorInfo decode_error(std::span<const uint8_t> payload) {
  ByteReader r(payload, "error");
  ErrorInfo e;
  const auto code = r.u8();
  if (code < 1 || code > 4) throw FormatError("error: unknown code " + std::to_string(code));
  e.code = static_cast<ErrorCode>(code);
  e.offending_type = r.u8();
  e.message = get_string(r);
  expect_end(r, "error");
  return e;
}

}  // namespace edgewear::wire
