#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "edgewear/audio/wav.hpp"
#include "edgewear/dataset/augment.hpp"
#include "edgewear/dataset/corpus.hpp"
#include "edgewear/dataset/segment.hpp"
#include "edgewear/dataset/toy.hpp"

namespace edgewear::cli {

void add_dataset_commands(CLI::App& app, Context& ctx) {
  auto* ds = app.add_subcommand("dataset", "Corpus ingestion, segmentation and augmentation");
  ds->require_subcommand(1);

  {
    auto* c = ds->add_subcommand("summarize", "Count clips per label and histogram durations");
    auto corpus = std::make_shared<std::string>();
    c->add_option("corpus", *corpus, "Corpus root with one folder per label")->required();
    ctx.on(c, [&ctx, corpus] {
      require_exists(*corpus, "corpus");
      const auto loaded = dataset::load_corpus(*corpus);
      for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& e : loaded.errors) std::cerr << "unreadable: " << e.path << ": " << e.message << "\n";
      std::ostringstream table;
      if (ctx.json()) {
        table << dataset::summary_json(loaded.summary) << "\n";
      } else {
        dataset::write_summary_csv(loaded.summary, table);
      }
      write_text(ctx.out_table("corpus_summary"), table.str());
      for (auto l : kws::kAllLabels) std::cout << kws::label_name(l) << ": " << loaded.summary.count(l) << "\n";
      std::cout << "total: " << loaded.summary.total() << " clips, " << loaded.summary.total_duration_s << " s\n";
      return 0;
    });
  }

  {
    auto* c = ds->add_subcommand("segment", "Cut a continuous recording into energy spikes");
    auto input = std::make_shared<std::string>();
    auto threshold = std::make_shared<std::optional<double>>();
    auto export_dir = std::make_shared<std::string>();
    c->add_option("input", *input, "16 kHz mono WAV recording")->required();
    c->add_option("--threshold-db", *threshold, "Absolute energy threshold in dBFS (default: adaptive)");
    c->add_option("--export", *export_dir, "Write each segment as a WAV into this directory");
    ctx.on(c, [&ctx, input, threshold, export_dir] {
      require_exists(*input, "input");
      const auto pcm = audio::read_wav(*input, {.downmix_stereo = true});
      dataset::SegmentConfig cfg;
      cfg.energy_threshold_db = *threshold;
      const auto segs = dataset::segment(pcm, cfg);
      nlohmann::json j = nlohmann::json::array();
      std::ostringstream csv;
      csv << "index,t_start,t_end\n";
      for (std::size_t i = 0; i < segs.size(); ++i) {
        csv << i << ',' << segs[i].t_start << ',' << segs[i].t_end << '\n';
        j.push_back({{"index", i}, {"t_start", segs[i].t_start}, {"t_end", segs[i].t_end}});
        if (!export_dir->empty()) {
          char name[32];
          std::snprintf(name, sizeof name, "segment_%03zu.wav", i);
          audio::write_wav(dataset::slice(pcm, segs[i]), fs::path(*export_dir) / name);
        }
      }
      write_text(ctx.out_table("segments"), ctx.json() ? j.dump(2) + "\n" : csv.str());
      std::cout << segs.size() << " segments\n";
      return 0;
    });
  }

  {
    auto* c = ds->add_subcommand("augment", "Write augmented variants of every clip");
    auto corpus = std::make_shared<std::string>();
    auto spec = std::make_shared<std::string>();
    auto variants = std::make_shared<std::size_t>(4);
    auto out = std::make_shared<std::string>();
    c->add_option("corpus", *corpus, "Corpus root")->required();
    c->add_option("--spec", *spec, "Augmentation spec (JSON file)")->required();
    c->add_option("--variants", *variants, "Variants per clip")->capture_default_str();
    c->add_option("--out", *out, "Output corpus root (default: <out-dir>/augmented)");
    ctx.on(c, [&ctx, corpus, spec, variants, out] {
      require_exists(*corpus, "corpus");
      require_exists(*spec, "spec");
      std::ifstream in(*spec);
      const std::string text((std::istreambuf_iterator<char>(in)), {});
      const auto aug = dataset::parse_augment_spec(text);
      const auto loaded = dataset::load_corpus(*corpus);
      std::vector<dataset::LabeledClip> all;
      const auto seed = ctx.seed_or(1);
      for (std::size_t i = 0; i < loaded.clips.size(); ++i) {
        auto v = dataset::augment(loaded.clips[i], aug, *variants, seed + i);
        all.insert(all.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
      }
      const fs::path dst = out->empty() ? ctx.out("augmented") : fs::path(*out);
      dataset::write_corpus(all, dst, "aug_");
      std::cout << "wrote " << all.size() << " clips to " << dst.string() << "\n";
      return 0;
    });
  }

  {
    auto* c = ds->add_subcommand("make-toy", "Synthesize the 4-class toy corpus");
    auto per_class = std::make_shared<std::size_t>(60);
    auto out = std::make_shared<std::string>();
    c->add_option("--per-class", *per_class, "Clips per label")->capture_default_str();
    c->add_option("--out", *out, "Corpus root (default: <out-dir>/toy_corpus)");
    ctx.on(c, [&ctx, per_class, out] {
      const auto clips = dataset::make_toy_corpus({*per_class, ctx.seed_or(1)});
      const fs::path dst = out->empty() ? ctx.out("toy_corpus") : fs::path(*out);
      dataset::write_corpus(clips, dst);
      std::cout << "wrote " << clips.size() << " clips to " << dst.string() << "\n";
      return 0;
    });
  }

  {
    auto* c = ds->add_subcommand("make-fixtures", "Regenerate bundled fixtures and trained models");
    auto data_dir = std::make_shared<std::string>("data");
    auto skip_models = std::make_shared<bool>(false);
    c->add_option("--data-dir", *data_dir, "Data directory to populate")->capture_default_str();
    c->add_flag("--skip-models", *skip_models, "Only write audio and photo fixtures");
    ctx.on(c, [&ctx, data_dir, skip_models] { return make_fixtures(*data_dir, ctx.seed_or(1), *skip_models); });
  }
}

}  // namespace edgewear::cli
