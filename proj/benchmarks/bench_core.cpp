#include <benchmark/benchmark.h>

#include <filesystem>

#include "edgewear/audio/adpcm.hpp"
#include "edgewear/dataset/toy.hpp"
#include "edgewear/dsp/mfcc.hpp"
#include "edgewear/intent/router.hpp"
#include "edgewear/kws/model_io.hpp"
#include "edgewear/kws/quantize.hpp"
#include "edgewear/wire/frame.hpp"

namespace fs = std::filesystem;
using namespace edgewear;

namespace {

const fs::path kData = EDGEWEAR_DATA_DIR;

void BM_AdpcmEncodeSecond(benchmark::State& state) {
  const auto pcm = dataset::synth_query(400.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(audio::adpcm_encode(pcm));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pcm.samples.size()));
}
BENCHMARK(BM_AdpcmEncodeSecond);

void BM_AdpcmDecodeSecond(benchmark::State& state) {
  const auto blocks = audio::adpcm_encode(dataset::synth_query(400.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(audio::adpcm_decode(blocks));
  state.SetItemsProcessed(state.iterations() * 16000);
}
BENCHMARK(BM_AdpcmDecodeSecond);

void BM_MfccWindow(benchmark::State& state) {
  const auto pcm = dataset::synth_query(300.0, 1.0);
  dsp::MfccExtractor mfcc;
  for (auto _ : state) benchmark::DoNotOptimize(mfcc.compute(pcm.samples));
}
BENCHMARK(BM_MfccWindow);

void BM_KwsFloat(benchmark::State& state) {
  const auto m = std::get<kws::KwsModel>(kws::load_model(kData / "models" / "kws_float.bin"));
  const auto f = dsp::mfcc_window(dataset::synth_query(300.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(kws::forward_float(m, f));
}
BENCHMARK(BM_KwsFloat);

void BM_KwsInt8(benchmark::State& state) {
  const auto m = kws::load_quantized_model(kData / "models" / "kws_int8.bin");
  const auto f = dsp::mfcc_window(dataset::synth_query(300.0, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(kws::forward_int8(m, f));
}
BENCHMARK(BM_KwsInt8);

void BM_IntentRoute(benchmark::State& state) {
  const intent::Router r(intent::load_intent_model(kData / "models" / "intent.json"));
  for (auto _ : state) benchmark::DoNotOptimize(r.handle("what's on this table?"));
}
BENCHMARK(BM_IntentRoute);

void BM_FrameRoundTrip(benchmark::State& state) {
  wire::Frame f;
  f.type = wire::FrameType::AUDIO_CHUNK;
  f.payload.assign(164, 0x5a);
  for (auto _ : state) benchmark::DoNotOptimize(wire::decode_frame(wire::encode_frame(f)));
}
BENCHMARK(BM_FrameRoundTrip);

}  // namespace
BENCHMARK_MAIN();
