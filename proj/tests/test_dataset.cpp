#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "edgewear/audio/wav.hpp"
#include "edgewear/dataset/augment.hpp"
#include "edgewear/dataset/corpus.hpp"
#include "edgewear/dataset/segment.hpp"
#include "edgewear/dataset/toy.hpp"
#include "edgewear/error.hpp"
#include "support.hpp"

using namespace edgewear;
using namespace edgewear::dataset;

namespace {

audio::PcmBuffer tone_bursts(double seconds, const std::vector<std::pair<double, double>>& bursts) {
  audio::PcmBuffer p;
  p.samples.assign(static_cast<std::size_t>(seconds * 16000), 0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 30.0);
  for (auto& s : p.samples) s = audio::clamp_to_i16(n(rng));
  for (auto [a, b] : bursts) {
    for (auto i = static_cast<std::size_t>(a * 16000); i < static_cast<std::size_t>(b * 16000); ++i)
      p.samples[i] = audio::clamp_to_i16(8000 * std::sin(0.2 * double(i)));
  }
  return p;
}

}  // namespace

TEST(Toy, BalancedAndDeterministic) {
  const auto a = make_toy_corpus({10, 4});
  const auto b = make_toy_corpus({10, 4});
  ASSERT_EQ(a.size(), 40u);
  const auto s = summarize(a);
  for (auto l : kws::kAllLabels) EXPECT_EQ(s.count(l), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].pcm, b[i].pcm);
  for (const auto& c : a) {
    if (c.label == Label::heydotty || c.label == Label::confuse) {
      EXPECT_GE(c.duration_s(), 0.6 - 1e-9);
      EXPECT_LE(c.duration_s(), 1.0 + 1e-9);
    }
  }
}

TEST(Toy, WindowedDatasetShapes) {
  const auto clips = make_toy_corpus({4, 2});
  WindowingConfig w;
  w.variants_per_clip = 2;
  const auto ds = windowed_feature_dataset(clips, w);
  EXPECT_EQ(ds.size(), clips.size() * 2);
  for (const auto& f : ds.features) {
    EXPECT_EQ(f.rows, 49u);
    EXPECT_EQ(f.cols, 13u);
  }
}

TEST(Toy, PlaceInWindowCutsHead) {
  audio::PcmBuffer clip, bg;
  clip.samples = {1, 2, 3, 4};
  bg.samples = {0, 0, 0};
  EXPECT_EQ(place_in_window(clip, -2, bg).samples, (std::vector<int16_t>{3, 4, 0}));
  EXPECT_EQ(place_in_window(clip, 1, bg).samples, (std::vector<int16_t>{0, 1, 2}));
}

TEST(Corpus, SummaryCountsAndHistogram) {
  std::vector<LabeledClip> clips(3);
  clips[0].pcm.samples.assign(8000, 0);  // 0.5 s
  clips[0].label = Label::noise;
  clips[1].pcm.samples.assign(16000, 0);  // 1.0 s
  clips[1].label = Label::noise;
  clips[2].pcm.samples.assign(4000, 0);  // 0.25 s
  clips[2].label = Label::heydotty;
  const auto s = summarize(clips);
  EXPECT_EQ(s.total(), 3u);
  EXPECT_EQ(s.count(Label::noise), 2u);
  EXPECT_NEAR(s.total_duration_s, 1.75, 1e-12);
  ASSERT_EQ(s.duration_histogram.size(), 11u);
  EXPECT_EQ(s.duration_histogram[2], 1u);
  EXPECT_EQ(s.duration_histogram[5], 1u);
  EXPECT_EQ(s.duration_histogram[10], 1u);
  std::ostringstream csv;
  write_summary_csv(s, csv);
  EXPECT_NE(csv.str().find("noise"), std::string::npos);
}

TEST(Corpus, WriteThenLoadWithWarningsAndErrors) {
  const auto root = support::scratch_dir("corpus");
  const auto clips = make_toy_corpus({3, 9});
  write_corpus(clips, root);
  std::filesystem::create_directories(root / "birdsong");
  audio::write_wav(synth_sine(300.0, 0.2, 0.2), root / "birdsong" / "x.wav");
  std::ofstream(root / "noise" / "broken.wav") << "not a wav";
  // 44.1 kHz stereo gets resampled and downmixed
  audio::PcmBuffer st;
  st.sample_rate_hz = 44100;
  st.channels = 2;
  st.samples.assign(44100, 100);
  audio::write_wav(st, root / "random" / "stereo.wav");

  const auto loaded = load_corpus(root);
  EXPECT_EQ(loaded.clips.size(), clips.size() + 1);
  EXPECT_EQ(loaded.summary.count(Label::unknown), 4u);
  ASSERT_EQ(loaded.errors.size(), 1u);
  EXPECT_NE(loaded.errors[0].path.find("broken.wav"), std::string::npos);
  ASSERT_FALSE(loaded.warnings.empty());
  EXPECT_NE(loaded.warnings[0].find("birdsong"), std::string::npos);
  for (const auto& c : loaded.clips) {
    EXPECT_EQ(c.pcm.sample_rate_hz, 16000);
    EXPECT_EQ(c.pcm.channels, 1);
  }
}

TEST(Corpus, NoLabelFoldersIsAnError) {
  const auto root = support::scratch_dir("empty_corpus");
  EXPECT_THROW(load_corpus(root), ConfigError);
}

TEST(Segment, FindsBurstsWithPadding) {
  const auto pcm = tone_bursts(6.0, {{1.0, 1.5}, {3.0, 3.4}, {3.5, 3.9}});
  const auto segs = segment(pcm);
  ASSERT_EQ(segs.size(), 2u);  // the last two merge across a 100 ms gap
  EXPECT_NEAR(segs[0].t_start, 0.9, 0.021);
  EXPECT_NEAR(segs[0].t_end, 1.6, 0.021);
  EXPECT_NEAR(segs[1].t_start, 2.9, 0.021);
  EXPECT_NEAR(segs[1].t_end, 4.0, 0.021);
  EXPECT_EQ(slice(pcm, segs[0]).samples.size(), static_cast<std::size_t>(std::lround((segs[0].t_end - segs[0].t_start) * 16000)));
}

TEST(Segment, SortedDisjointAndClipped) {
  const auto pcm = tone_bursts(3.0, {{0.0, 0.3}, {2.8, 3.0}});
  const auto segs = segment(pcm);
  ASSERT_FALSE(segs.empty());
  EXPECT_GE(segs.front().t_start, 0.0);
  EXPECT_LE(segs.back().t_end, 3.0);
  for (std::size_t i = 1; i < segs.size(); ++i) EXPECT_GT(segs[i].t_start, segs[i - 1].t_end);
}

TEST(Segment, AbsoluteThreshold) {
  SegmentConfig cfg;
  cfg.energy_threshold_db = 0.0;  // nothing is louder than full scale
  EXPECT_TRUE(segment(tone_bursts(2.0, {{0.5, 1.0}}), cfg).empty());
}

TEST(Augment, GainShiftAndDeterminism) {
  LabeledClip clip;
  clip.label = Label::confuse;
  clip.pcm = synth_sine(500.0, 0.5, 0.1);
  AugmentSpec spec;
  spec.gain_db = {6.0, 6.0};
  const auto out = augment(clip, spec, 3, 1);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& v : out) {
    EXPECT_EQ(v.label, Label::confuse);
    EXPECT_NEAR(rms(v.pcm) / rms(clip.pcm), std::pow(10.0, 0.3), 1e-3);
  }
  spec = {};
  spec.time_shift_ms = {10.0, 10.0};
  const auto shifted = augment(clip, spec, 1, 1)[0];
  for (int i = 0; i < 160; ++i) EXPECT_EQ(shifted.pcm.samples[i], 0);
  EXPECT_EQ(shifted.pcm.samples[160], clip.pcm.samples[0]);
  spec.noise_snr_db = Range{5.0, 20.0};
  spec.gain_db = {-3.0, 3.0};
  const auto a = augment(clip, spec, 4, 99), b = augment(clip, spec, 4, 99);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].pcm, b[i].pcm);
}

TEST(Augment, NoiseHitsRequestedSnr) {
  LabeledClip clip;
  clip.label = Label::unknown;
  clip.pcm = synth_sine(700.0, 1.0, 0.2);
  AugmentSpec spec;
  for (double snr : {0.0, 10.0, 20.0}) {
    spec.noise_snr_db = Range{snr, snr};
    const auto v = augment(clip, spec, 1, 3)[0];
    EXPECT_NEAR(measured_snr_db(clip.pcm, v.pcm), snr, 0.2);
  }
}

TEST(Augment, PositivesFitDurationWindow) {
  LabeledClip clip;
  clip.label = Label::heydotty;
  clip.pcm = synth_sine(500.0, 0.3, 0.1);
  const auto v = augment(clip, {}, 1, 1)[0];
  EXPECT_NEAR(v.duration_s(), 0.6, 1e-9);
}

TEST(Augment, SpecParsingAndValidation) {
  const auto s = parse_augment_spec(R"({"gain_db": [-6, 6], "noise_snr_db": [10, 30], "time_shift_ms": [-50, 50]})");
  EXPECT_EQ(s.gain_db.lo, -6.0);
  ASSERT_TRUE(s.noise_snr_db);
  EXPECT_EQ(s.noise_snr_db->hi, 30.0);
  EXPECT_THROW(parse_augment_spec(R"({"gain_db": [6, -6]})"), ConfigError);
  LabeledClip longclip;
  longclip.pcm = synth_sine(500.0, 1.5, 0.1);
  EXPECT_THROW(augment(longclip, {}, 1, 1), InputError);
}
