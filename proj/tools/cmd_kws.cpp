#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "edgewear/audio/wav.hpp"
#include "edgewear/dataset/corpus.hpp"
#include "edgewear/dataset/toy.hpp"
#include "edgewear/error.hpp"
#include "edgewear/kws/detector.hpp"
#include "edgewear/kws/model_io.hpp"
#include "edgewear/kws/profile.hpp"
#include "edgewear/kws/train.hpp"

namespace edgewear::cli {

namespace {

struct CorpusArgs {
  std::string corpus;
  bool toy = false;
  std::size_t per_class = 60;
};

void add_corpus_args(CLI::App* c, CorpusArgs& a) {
  c->add_option("--corpus", a.corpus, "Corpus root with one folder per label");
  c->add_flag("--toy", a.toy, "Use the synthetic toy corpus instead");
  c->add_option("--per-class", a.per_class, "Toy clips per label")->capture_default_str();
}

kws::FeatureDataset load_features(const CorpusArgs& a, uint64_t seed) {
  std::vector<dataset::LabeledClip> clips;
  if (a.toy) {
    clips = dataset::make_toy_corpus({a.per_class, seed});
  } else {
    if (a.corpus.empty()) throw ConfigError("give --corpus <dir> or --toy");
    require_exists(a.corpus, "corpus");
    auto loaded = dataset::load_corpus(a.corpus);
    for (const auto& e : loaded.errors) std::cerr << "unreadable: " << e.path << ": " << e.message << "\n";
    clips = std::move(loaded.clips);
  }
  dataset::WindowingConfig w;
  w.seed = seed + 10;
  return dataset::windowed_feature_dataset(clips, w);
}

kws::Posterior score(const kws::AnyKwsModel& m, const dsp::FeatureMatrix& f) {
  return std::visit(
      [&](const auto& model) {
        if constexpr (std::is_same_v<std::decay_t<decltype(model)>, kws::KwsModel>) {
          return kws::forward_float(model, f);
        } else {
          return kws::forward_int8(model, f);
        }
      },
      m);
}

kws::ResourceProfile profile_of(const kws::AnyKwsModel& m) {
  return std::visit([](const auto& model) { return kws::profile(model); }, m);
}

}  // namespace

void add_kws_commands(CLI::App& app, Context& ctx) {
  auto* k = app.add_subcommand("kws", "Wake-word model training, quantization and detection");
  k->require_subcommand(1);

  {
    auto* c = k->add_subcommand("train", "Train the float CNN and write float + INT8 models");
    auto a = std::make_shared<CorpusArgs>();
    auto cfg = std::make_shared<kws::TrainConfig>();
    add_corpus_args(c, *a);
    c->add_option("--epochs", cfg->epochs)->capture_default_str();
    c->add_option("--lr", cfg->learning_rate)->capture_default_str();
    c->add_option("--batch", cfg->batch_size)->capture_default_str();
    ctx.on(c, [&ctx, a, cfg] {
      auto tc = *cfg;
      tc.seed = ctx.seed_or(tc.seed);
      const auto ds = load_features(*a, ctx.seed_or(1));
      const auto r = kws::train(ds, tc);
      std::vector<dsp::FeatureMatrix> cal;
      for (auto i : r.train_indices) cal.push_back(ds.features[i]);
      const auto q = kws::quantize_int8(r.model, cal);
      std::size_t agree = 0;
      for (auto i : r.val_indices) {
        agree += kws::argmax(kws::forward_float(r.model, ds.features[i])) ==
                 kws::argmax(kws::forward_int8(q, ds.features[i]));
      }
      const double agreement = r.val_indices.empty() ? 0.0 : static_cast<double>(agree) / r.val_indices.size();
      kws::save_model(r.model, ctx.out("kws_float.bin"));
      kws::save_model(q, ctx.out("kws_int8.bin"));
      if (ctx.json()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& h : r.history) {
          j.push_back({{"epoch", h.epoch}, {"train_loss", h.train_loss}, {"train_accuracy", h.train_accuracy},
                       {"val_loss", h.val_loss}, {"val_accuracy", h.val_accuracy}});
        }
        write_json(ctx.out("kws_metrics.json"), j);
      } else {
        std::ofstream m(ctx.out("kws_metrics.csv"));
        kws::write_metrics_csv(r.history, m);
      }
      std::cout << "examples: " << ds.size() << " (train " << r.train_indices.size() << ", val "
                << r.val_indices.size() << ")\n"
                << "final val accuracy: " << r.final_val_accuracy() << "\n"
                << "int8 top-1 agreement: " << agreement << "\n";
      return 0;
    });
  }

  {
    auto* c = k->add_subcommand("eval", "Accuracy and confusion matrix of a model on a corpus");
    auto a = std::make_shared<CorpusArgs>();
    auto model = std::make_shared<std::string>();
    c->add_option("--model", *model, "Float or INT8 model file")->required();
    add_corpus_args(c, *a);
    ctx.on(c, [&ctx, a, model] {
      require_exists(*model, "model");
      const auto m = kws::load_model(*model);
      const auto ds = load_features(*a, ctx.seed_or(1));
      std::array<std::array<std::size_t, kws::kNumLabels>, kws::kNumLabels> confusion{};
      std::size_t correct = 0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto pred = kws::argmax(score(m, ds.features[i]));
        const auto truth = kws::index_of(ds.labels[i]);
        ++confusion[truth][pred];
        correct += pred == truth;
      }
      const double acc = ds.size() ? static_cast<double>(correct) / ds.size() : 0.0;
      std::ostringstream csv;
      csv << "truth";
      for (auto l : kws::kAllLabels) csv << ',' << kws::label_name(l);
      csv << '\n';
      nlohmann::json j = {{"accuracy", acc}, {"examples", ds.size()}};
      for (auto t : kws::kAllLabels) {
        csv << kws::label_name(t);
        for (auto p : kws::kAllLabels) {
          csv << ',' << confusion[kws::index_of(t)][kws::index_of(p)];
          j["confusion"][std::string(kws::label_name(t))][std::string(kws::label_name(p))] =
              confusion[kws::index_of(t)][kws::index_of(p)];
        }
        csv << '\n';
      }
      write_text(ctx.out_table("kws_eval"), ctx.json() ? j.dump(2) + "\n" : csv.str());
      std::cout << "accuracy: " << acc << " over " << ds.size() << " windows\n";
      return 0;
    });
  }

  {
    auto* c = k->add_subcommand("quantize", "Post-training INT8 quantization of a float model");
    auto a = std::make_shared<CorpusArgs>();
    auto model = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    c->add_option("--model", *model, "Float model file")->required();
    c->add_option("--out", *out, "INT8 model file (default: <out-dir>/kws_int8.bin)");
    add_corpus_args(c, *a);
    ctx.on(c, [&ctx, a, model, out] {
      require_exists(*model, "model");
      const auto any = kws::load_model(*model);
      const auto* fm = std::get_if<kws::KwsModel>(&any);
      if (!fm) throw ConfigError("quantize: " + *model + " is already an INT8 model");
      const auto ds = load_features(*a, ctx.seed_or(1));
      const auto q = kws::quantize_int8(*fm, ds.features);
      std::size_t agree = 0;
      for (const auto& f : ds.features) agree += kws::argmax(kws::forward_float(*fm, f)) == kws::argmax(kws::forward_int8(q, f));
      const fs::path dst = out->empty() ? ctx.out("kws_int8.bin") : fs::path(*out);
      kws::save_model(q, dst);
      std::cout << "wrote " << dst.string() << "\ntop-1 agreement with float: "
                << (ds.size() ? static_cast<double>(agree) / ds.size() : 0.0) << "\n";
      return 0;
    });
  }

  {
    auto* c = k->add_subcommand("profile", "Parameter, MAC and memory counts plus wall-clock per window");
    auto model = std::make_shared<std::string>();
    auto reps = std::make_shared<int>(200);
    c->add_option("--model", *model, "Float or INT8 model file")->required();
    c->add_option("--reps", *reps, "Timed inferences")->capture_default_str();
    ctx.on(c, [&ctx, model, reps] {
      require_exists(*model, "model");
      const auto m = kws::load_model(*model);
      const auto p = profile_of(m);
      dsp::FeatureMatrix f{49, 13, std::vector<float>(49 * 13, 0.0f)};
      const auto t0 = std::chrono::steady_clock::now();
      volatile double sink = 0.0;
      for (int i = 0; i < *reps; ++i) sink = sink + score(m, f)[0];
      const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count() /
                        std::max(1, *reps);
      const nlohmann::json j = {{"params", p.params},
                                {"macs", p.macs},
                                {"peak_activation_bytes", p.peak_activation_bytes},
                                {"weight_bytes", p.weight_bytes},
                                {"bias_widening_bytes", p.bias_widening_bytes},
                                {"us_per_window", us}};
      std::ostringstream csv;
      csv << "metric,value\n";
      for (const auto& [key, v] : j.items()) csv << key << ',' << v.dump() << '\n';
      write_text(ctx.out_table("kws_profile"), ctx.json() ? j.dump(2) + "\n" : csv.str());
      for (const auto& [key, v] : j.items()) std::cout << key << ": " << v.dump() << '\n';
      return 0;
    });
  }

  {
    auto* c = k->add_subcommand("detect", "Run the streaming detector over a recording");
    auto model = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    auto cfg = std::make_shared<kws::DetectorConfig>();
    auto trace = std::make_shared<bool>(false);
    c->add_option("--model", *model, "Float or INT8 model file")->required();
    c->add_option("input", *input, "16 kHz WAV recording")->required();
    c->add_option("--threshold", cfg->threshold)->capture_default_str();
    c->add_option("--smoothing", cfg->smoothing)->capture_default_str();
    c->add_option("--suppression", cfg->suppression_s, "Refractory window in seconds")->capture_default_str();
    c->add_flag("--trace", *trace, "Also write per-window scores");
    ctx.on(c, [&ctx, model, input, cfg, trace] {
      require_exists(*model, "model");
      require_exists(*input, "input");
      cfg->validate();
      const auto m = kws::load_model(*model);
      const auto pcm = audio::read_wav(*input, {.downmix_stereo = true});
      kws::StreamingDetector det([&m](const dsp::FeatureMatrix& f) { return score(m, f); }, *cfg);
      const auto events = det.push(pcm.samples);
      std::ostringstream csv;
      csv << "t_start,t_end,label,score\n";
      nlohmann::json j = nlohmann::json::array();
      for (const auto& e : events) {
        csv << e.t_start << ',' << e.t_end << ',' << kws::label_name(e.label) << ',' << e.score << '\n';
        j.push_back({{"t_start", e.t_start}, {"t_end", e.t_end}, {"label", kws::label_name(e.label)}, {"score", e.score}});
      }
      write_text(ctx.out_table("detections"), ctx.json() ? j.dump(2) + "\n" : csv.str());
      if (*trace) {
        std::ofstream t(ctx.out("detector_trace.csv"));
        t << "t_start,posterior,smoothed\n";
        for (const auto& w : det.trace()) t << w.t_start << ',' << w.posterior << ',' << w.smoothed << '\n';
      }
      std::cout << csv.str();
      return 0;
    });
  }
}

}  // namespace edgewear::cli
