#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json_fwd.hpp>

namespace edgewear::cli {

namespace fs = std::filesystem;

/// Global flags plus the action picked by the parsed subcommand.
struct Context {
  std::optional<uint64_t> seed;
  std::string out_dir = "out";
  std::string format = "csv";
  std::vector<std::pair<CLI::App*, std::function<int()>>> actions;

  uint64_t seed_or(uint64_t fallback) const { return seed.value_or(fallback); }
  bool json() const { return format == "json"; }
  /// out_dir/name, creating out_dir.
  fs::path out(const std::string& name) const;
  /// out_dir/<stem>.csv or .json depending on --format.
  fs::path out_table(const std::string& stem) const;

  void on(CLI::App* sub, std::function<int()> fn) { actions.emplace_back(sub, std::move(fn)); }
};

/// Throws ConfigError (exit 2) if the path is missing.
void require_exists(const fs::path& p, const std::string& what);
void write_text(const fs::path& p, const std::string& text);
void write_json(const fs::path& p, const nlohmann::json& j);

void add_dataset_commands(CLI::App& app, Context& ctx);
void add_kws_commands(CLI::App& app, Context& ctx);
void add_intent_commands(CLI::App& app, Context& ctx);
void add_codec_commands(CLI::App& app, Context& ctx);
void add_sim_commands(CLI::App& app, Context& ctx);

/// Regenerates the bundled WAV/PPM fixtures and trained models under `data_dir`.
int make_fixtures(const fs::path& data_dir, uint64_t seed, bool skip_models);

}  // namespace edgewear::cli
