#include "edgewear/dataset/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "edgewear/audio/resample.hpp"
#include "edgewear/audio/wav.hpp"
#include "edgewear/error.hpp"

namespace edgewear::dataset {

namespace fs = std::filesystem;

std::size_t CorpusSummary::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

CorpusSummary summarize(const std::vector<LabeledClip>& clips, double bin_s) {
  CorpusSummary s;
  s.histogram_bin_s = bin_s;
  for (const auto& c : clips) {
    ++s.counts[kws::index_of(c.label)];
    const double d = c.duration_s();
    s.total_duration_s += d;
    const auto bin = static_cast<std::size_t>(std::floor(d / bin_s + 1e-9));
    if (s.duration_histogram.size() <= bin) s.duration_histogram.resize(bin + 1, 0);
    ++s.duration_histogram[bin];
  }
  return s;
}

LoadedCorpus load_corpus(const fs::path& root) {
  if (!fs::is_directory(root)) throw ConfigError("corpus root is not a directory: " + root.string());
  LoadedCorpus out;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  bool any_label = false;
  for (const auto& dir : dirs) {
    const auto label = kws::parse_label(dir.filename().string());
    if (!label) {
      out.warnings.push_back("skipping folder '" + dir.filename().string() + "': not a known label");
      continue;
    }
    any_label = true;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      try {
        auto pcm = audio::read_wav(file, {.downmix_stereo = true});
        if (pcm.sample_rate_hz != audio::kCanonicalRateHz) pcm = audio::resample(pcm, audio::kCanonicalRateHz);
        out.clips.push_back({std::move(pcm), *label, file.string()});
      } catch (const std::exception& e) {
        out.errors.push_back({file.string(), e.what()});
      }
    }
  }
  if (!any_label) throw ConfigError("no label folders (heydotty/confuse/noise/unknown) under " + root.string());
  out.summary = summarize(out.clips);
  return out;
}

void write_corpus(const std::vector<LabeledClip>& clips, const fs::path& root, const std::string& prefix) {
  std::map<Label, std::size_t> next;
  for (const auto& clip : clips) {
    const auto n = next[clip.label]++;
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.wav", n);
    audio::write_wav(clip.pcm, root / std::string(kws::label_name(clip.label)) / (prefix + name));
  }
}

void write_summary_csv(const CorpusSummary& s, std::ostream& out) {
  out << "label,count\n";
  for (Label l : kws::kAllLabels) out << kws::label_name(l) << ',' << s.count(l) << '\n';
  out << "total," << s.total() << '\n';
  out << "total_duration_s," << s.total_duration_s << '\n';
  out << "\nduration_bin_start_s,count\n";
  for (std::size_t i = 0; i < s.duration_histogram.size(); ++i) {
    out << static_cast<double>(i) * s.histogram_bin_s << ',' << s.duration_histogram[i] << '\n';
  }
}

std::string summary_json(const CorpusSummary& s) {
  nlohmann::json j;
  for (Label l : kws::kAllLabels) j["counts"][std::string(kws::label_name(l))] = s.count(l);
  j["total"] = s.total();
  j["total_duration_s"] = s.total_duration_s;
  j["histogram_bin_s"] = s.histogram_bin_s;
  j["duration_histogram"] = s.duration_histogram;
  return j.dump(2);
}

}  // namespace edgewear::dataset
