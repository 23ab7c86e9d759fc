#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgewear/audio/pcm.hpp"
#include "edgewear/kws/labels.hpp"

namespace edgewear::dataset {

using kws::Label;

struct LabeledClip {
  audio::PcmBuffer pcm;
  Label label = Label::unknown;
  std::string source_path;

  double duration_s() const { return pcm.duration_s(); }
};

struct CorpusSummary {
  std::array<std::size_t, kws::kNumLabels> counts{};
  double total_duration_s = 0.0;
  double histogram_bin_s = 0.1;
  std::vector<std::size_t> duration_histogram;  // bin i covers [i*bin, (i+1)*bin)

  std::size_t count(Label l) const { return counts[kws::index_of(l)]; }
  std::size_t total() const;
  bool operator==(const CorpusSummary&) const = default;
};

CorpusSummary summarize(const std::vector<LabeledClip>& clips, double bin_s = 0.1);

struct FileIssue {
  std::string path;
  std::string message;
};

struct LoadedCorpus {
  std::vector<LabeledClip> clips;
  CorpusSummary summary;
  std::vector<std::string> warnings;  // e.g. skipped folders
  std::vector<FileIssue> errors;      // unreadable files (not fatal)
};

/// Walks `root/<label>/**.wav`. Unknown folder names are skipped with a
/// warning, unreadable files are reported per file, non-16 kHz audio is
/// resampled and stereo is downmixed. Throws ConfigError when `root` has no
/// label folder at all. Clip order is deterministic (sorted paths).
LoadedCorpus load_corpus(const std::filesystem::path& root);

/// Writes clips as `root/<label>/<prefix><index>.wav`.
void write_corpus(const std::vector<LabeledClip>& clips, const std::filesystem::path& root,
                  const std::string& prefix = "clip_");

void write_summary_csv(const CorpusSummary& s, std::ostream& out);
std::string summary_json(const CorpusSummary& s);

}  // namespace edgewear::dataset
