#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "edgewear/kws/model.hpp"
#include "edgewear/kws/quantize.hpp"

namespace edgewear::kws {

// KWS1 container, little-endian:
//   "KWS1" | version u16 | kind u8 (0 float, 1 int8) | reserved u8
//   layer table: count u16, then per layer {type u8, in u16, out u16, kernel u16}
//   input norm: n u16, mean f32[n], inv_std f32[n]
//   float:  per layer weight f32[...], bias f32[out]
//   int8:   input {scale f64, zp i32}; per layer {w_scale f64, weight i8[...],
//           bias i32[out], m0 i32, shift i32, out_scale f64, out_zp i32}
inline constexpr uint16_t kModelFormatVersion = 1;

std::vector<uint8_t> serialize_model(const KwsModel& model);
std::vector<uint8_t> serialize_model(const QuantizedKwsModel& model);

using AnyKwsModel = std::variant<KwsModel, QuantizedKwsModel>;
/// Throws FormatError on bad magic, unknown version or inconsistent shapes.
AnyKwsModel parse_model(std::span<const uint8_t> bytes);

void save_model(const KwsModel& model, const std::filesystem::path& path);
void save_model(const QuantizedKwsModel& model, const std::filesystem::path& path);
AnyKwsModel load_model(const std::filesystem::path& path);
QuantizedKwsModel load_quantized_model(const std::filesystem::path& path);

}  // namespace edgewear::kws
