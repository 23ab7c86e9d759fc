#include "edgewear/kws/model_io.hpp"

#include <string>

#include "edgewear/audio/wav.hpp"
#include "edgewear/bytes.hpp"

namespace edgewear::kws {
namespace {

enum class LayerType : uint8_t { conv1d = 1, dense = 2 };
enum class Kind : uint8_t { float32 = 0, int8 = 1 };

struct LayerEntry {
  LayerType type;
  uint16_t in, out, kernel;
};

void write_header(ByteWriter& w, Kind kind, const std::vector<LayerEntry>& layers, const InputNorm& norm) {
  w.tag("KWS1");
  w.u16(kModelFormatVersion);
  w.u8(static_cast<uint8_t>(kind));
  w.u8(0);
  w.u16(static_cast<uint16_t>(layers.size()));
  for (const auto& l : layers) {
    w.u8(static_cast<uint8_t>(l.type));
    w.u16(l.in);
    w.u16(l.out);
    w.u16(l.kernel);
  }
  w.u16(static_cast<uint16_t>(norm.mean.size()));
  for (double v : norm.mean) w.f32(static_cast<float>(v));
  for (double v : norm.inv_std) w.f32(static_cast<float>(v));
}

template <typename C, typename D>
std::vector<LayerEntry> table(const C& c1, const C& c2, const D& d) {
  auto u = [](std::size_t v) { return static_cast<uint16_t>(v); };
  return {{LayerType::conv1d, u(c1.in_ch), u(c1.out_ch), u(c1.kernel)},
          {LayerType::conv1d, u(c2.in_ch), u(c2.out_ch), u(c2.kernel)},
          {LayerType::dense, u(d.in), u(d.out), 1}};
}

void expect_topology(const std::vector<LayerEntry>& layers) {
  const KwsModel ref = KwsModel::zeros();
  const auto want = table(ref.conv1, ref.conv2, ref.dense);
  if (layers.size() != want.size()) throw FormatError("KWS1: unexpected layer count " + std::to_string(layers.size()));
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (layers[i].type != want[i].type || layers[i].in != want[i].in || layers[i].out != want[i].out ||
        layers[i].kernel != want[i].kernel) {
      throw FormatError("KWS1: layer " + std::to_string(i) + " does not match the supported topology");
    }
  }
}

void write_quant(ByteWriter& w, const QuantParams& p) {
  w.f64(p.scale);
  w.i32(p.zero_point);
}
QuantParams read_quant(ByteReader& r) {
  QuantParams p;
  p.scale = r.f64();
  p.zero_point = r.i32();
  if (!(p.scale > 0.0)) throw FormatError("KWS1: non-positive quantization scale");
  return p;
}

template <typename L>
void write_qlayer(ByteWriter& w, const L& l) {
  w.f64(l.weight_params.scale);
  for (int8_t v : l.weight) w.i8(v);
  for (int32_t v : l.bias) w.i32(v);
  w.i32(l.requant.m0);
  w.i32(l.requant.shift);
  write_quant(w, l.output);
}

template <typename L>
void read_qlayer(ByteReader& r, L& l, std::size_t n_weights, std::size_t n_bias) {
  l.weight_params = {r.f64(), 0};
  l.weight.resize(n_weights);
  for (auto& v : l.weight) v = r.i8();
  l.bias.resize(n_bias);
  for (auto& v : l.bias) v = r.i32();
  l.requant.m0 = r.i32();
  l.requant.shift = r.i32();
  l.output = read_quant(r);
}

void read_floats(ByteReader& r, std::vector<double>& v) {
  for (auto& x : v) x = r.f32();
}

}  // namespace

std::vector<uint8_t> serialize_model(const KwsModel& model) {
  ByteWriter w;
  write_header(w, Kind::float32, table(model.conv1, model.conv2, model.dense), model.norm);
  for (auto p : model.parameters()) {
    for (double v : p) w.f32(static_cast<float>(v));
  }
  return w.take();
}

std::vector<uint8_t> serialize_model(const QuantizedKwsModel& model) {
  ByteWriter w;
  write_header(w, Kind::int8, table(model.conv1, model.conv2, model.dense), model.norm);
  write_quant(w, model.input);
  write_qlayer(w, model.conv1);
  write_qlayer(w, model.conv2);
  write_qlayer(w, model.dense);
  return w.take();
}

AnyKwsModel parse_model(std::span<const uint8_t> bytes) {
  ByteReader r(bytes, "KWS1 model");
  if (!r.tag("KWS1")) throw FormatError("KWS1: bad magic");
  const auto version = r.u16();
  if (version != kModelFormatVersion) throw FormatError("KWS1: unsupported version " + std::to_string(version));
  const auto kind = static_cast<Kind>(r.u8());
  r.u8();
  std::vector<LayerEntry> layers(r.u16());
  for (auto& l : layers) {
    l.type = static_cast<LayerType>(r.u8());
    l.in = r.u16();
    l.out = r.u16();
    l.kernel = r.u16();
  }
  expect_topology(layers);
  InputNorm norm;
  const auto n = r.u16();
  if (n != kInputCoeffs) throw FormatError("KWS1: input norm has " + std::to_string(n) + " coefficients");
  read_floats(r, norm.mean);
  read_floats(r, norm.inv_std);

  AnyKwsModel out;
  if (kind == Kind::float32) {
    KwsModel m = KwsModel::zeros();
    m.norm = norm;
    for (auto p : m.parameters()) {
      for (auto& v : p) v = r.f32();
    }
    out = std::move(m);
  } else if (kind == Kind::int8) {
    const KwsModel shape = KwsModel::zeros();
    QuantizedKwsModel q;
    q.norm = norm;
    q.input = read_quant(r);
    auto init_conv = [](QConv1d& qc, const Conv1d& c) {
      qc.in_ch = c.in_ch;
      qc.out_ch = c.out_ch;
      qc.kernel = c.kernel;
    };
    init_conv(q.conv1, shape.conv1);
    init_conv(q.conv2, shape.conv2);
    q.dense.in = shape.dense.in;
    q.dense.out = shape.dense.out;
    read_qlayer(r, q.conv1, shape.conv1.weight.size(), shape.conv1.bias.size());
    read_qlayer(r, q.conv2, shape.conv2.weight.size(), shape.conv2.bias.size());
    read_qlayer(r, q.dense, shape.dense.weight.size(), shape.dense.bias.size());
    out = std::move(q);
  } else {
    throw FormatError("KWS1: unknown model kind");
  }
  if (r.remaining() != 0) throw FormatError("KWS1: trailing bytes");
  return out;
}

void save_model(const KwsModel& model, const std::filesystem::path& path) {
  audio::write_file_bytes(path, serialize_model(model));
}
void save_model(const QuantizedKwsModel& model, const std::filesystem::path& path) {
  audio::write_file_bytes(path, serialize_model(model));
}
AnyKwsModel load_model(const std::filesystem::path& path) { return parse_model(audio::read_file_bytes(path)); }

QuantizedKwsModel load_quantized_model(const std::filesystem::path& path) {
  auto any = load_model(path);
  if (auto* q = std::get_if<QuantizedKwsModel>(&any)) return std::move(*q);
  throw FormatError(path.string() + ": expected an INT8 model");
}

}  // namespace edgewear::kws
