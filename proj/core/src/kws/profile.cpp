#include "edgewear/kws/profile.hpp"

#include <algorithm>

namespace edgewear::kws {
namespace {

struct LayerShape {
  std::size_t in_elems;
  std::size_t out_elems;
  std::size_t macs;
};

// The topology is fixed, so the counts only depend on layer sizes.
template <typename ConvT, typename DenseT>
std::vector<LayerShape> layer_shapes(const ConvT& c1, const ConvT& c2, const DenseT& d) {
  return {
      {kInputFrames * c1.in_ch, kInputFrames * c1.out_ch, kInputFrames * c1.out_ch * c1.kernel * c1.in_ch},
      {kInputFrames * c1.out_ch, kPool1Frames * c1.out_ch, 0},  // pool
      {kPool1Frames * c2.in_ch, kPool1Frames * c2.out_ch, kPool1Frames * c2.out_ch * c2.kernel * c2.in_ch},
      {kPool1Frames * c2.out_ch, kPool2Frames * c2.out_ch, 0},  // pool
      {d.in, d.out, d.in * d.out},
  };
}

ResourceProfile build(const std::vector<LayerShape>& layers, std::size_t params, std::size_t elem_bytes) {
  ResourceProfile p;
  p.params = params;
  for (const auto& l : layers) {
    p.macs += l.macs;
    p.peak_activation_bytes = std::max(p.peak_activation_bytes, (l.in_elems + l.out_elems) * elem_bytes);
  }
  p.weight_bytes = params * elem_bytes;
  return p;
}

}  // namespace

ResourceProfile profile(const KwsModel& model) {
  return build(layer_shapes(model.conv1, model.conv2, model.dense), model.parameter_count(), sizeof(float));
}

ResourceProfile profile(const QuantizedKwsModel& model) {
  auto p = build(layer_shapes(model.conv1, model.conv2, model.dense), model.parameter_count(), 1);
  p.bias_widening_bytes = 3 * (model.conv1.bias.size() + model.conv2.bias.size() + model.dense.bias.size());
  return p;
}

}  // namespace edgewear::kws
