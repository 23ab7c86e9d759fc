#include <fstream>
#include <iostream>
#include <random>

#include "cli.hpp"
#include "edgewear/audio/wav.hpp"
#include "edgewear/dataset/toy.hpp"
#include "edgewear/device/device.hpp"
#include "edgewear/intent/classifier.hpp"
#include "edgewear/kws/model_io.hpp"
#include "edgewear/kws/train.hpp"

namespace edgewear::cli {

namespace {

struct Rect {
  int x, y, w, h;
  uint8_t r, g, b;
};

std::vector<uint8_t> paint(int w, int h, std::array<uint8_t, 3> bg, const std::vector<Rect>& rects) {
  std::vector<uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = &px[(static_cast<std::size_t>(y) * w + x) * 3];
      // faint wood grain
      const int grain = ((x * 7 + y * 3) % 11) - 5;
      for (int c = 0; c < 3; ++c) p[c] = static_cast<uint8_t>(std::clamp(bg[c] + grain, 0, 255));
      for (const auto& r : rects) {
        if (x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h) {
          p[0] = r.r;
          p[1] = r.g;
          p[2] = r.b;
        }
      }
    }
  }
  return px;
}

}  // namespace

int make_fixtures(const fs::path& data_dir, uint64_t seed, bool skip_models) {
  const auto fx = data_dir / "fixtures";
  fs::create_directories(fx / "photos");

  audio::write_wav(dataset::make_speech_proxy_recording(60.0, seed), fx / "speech_proxy_60s.wav");

  std::mt19937_64 rng(seed);
  for (int i = 1; i <= 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "wake_%02d.wav", i);
    audio::write_wav(dataset::synth_utterance(kws::Label::heydotty, rng), fx / name);
  }
  audio::write_wav(dataset::synth_utterance(kws::Label::confuse, rng), fx / "confuse_01.wav");
  for (int hz : {300, 400, 500, 600, 700}) {
    audio::write_wav(dataset::synth_query(hz, 2.0), fx / ("query_" + std::to_string(hz) + ".wav"));
  }
  {
    audio::PcmBuffer st;
    st.sample_rate_hz = 44100;
    st.channels = 2;
    const auto left = dataset::synth_sine(440.0, 0.5, 0.3, 44100);
    const auto right = dataset::synth_sine(660.0, 0.5, 0.3, 44100);
    for (std::size_t i = 0; i < left.samples.size(); ++i) {
      st.samples.push_back(left.samples[i]);
      st.samples.push_back(right.samples[i]);
    }
    audio::write_wav(st, fx / "stereo_44k.wav");
  }
  device::save_photo_ppm(fx / "photos" / "table.ppm", 64, 48,
                         paint(64, 48, {150, 105, 60},
                               {{6, 8, 24, 16, 40, 40, 48}, {36, 10, 8, 10, 230, 230, 220}, {40, 28, 18, 12, 200, 30, 30}}));
  device::save_photo_ppm(fx / "photos" / "desk.ppm", 64, 48,
                         paint(64, 48, {90, 90, 95}, {{10, 4, 40, 22, 20, 20, 30}, {12, 32, 36, 8, 210, 210, 210}}));
  std::cout << "wrote audio and photo fixtures to " << fx.string() << "\n";
  if (skip_models) return 0;

  const auto md = data_dir / "models";
  fs::create_directories(md);
  const auto clips = dataset::make_toy_corpus({60, seed});
  dataset::WindowingConfig w;
  w.seed = seed + 10;
  const auto ds = dataset::windowed_feature_dataset(clips, w);
  const auto r = kws::train(ds, {});
  std::vector<dsp::FeatureMatrix> cal;
  for (auto i : r.train_indices) cal.push_back(ds.features[i]);
  kws::save_model(r.model, md / "kws_float.bin");
  kws::save_model(kws::quantize_int8(r.model, cal), md / "kws_int8.bin");
  {
    std::ofstream m(md / "kws_metrics.csv");
    kws::write_metrics_csv(r.history, m);
  }
  std::cout << "kws: val accuracy " << r.final_val_accuracy() << "\n";

  const auto corpus = intent::load_intent_corpus(data_dir / "intents.tsv");
  intent::save_intent_model(intent::fit(corpus).model, md / "intent.json");
  std::cout << "wrote models to " << md.string() << "\n";
  return 0;
}

}  // namespace edgewear::cli
