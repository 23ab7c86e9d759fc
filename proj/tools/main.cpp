#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "edgewear/error.hpp"

namespace edgewear::cli {

fs::path Context::out(const std::string& name) const {
  fs::create_directories(out_dir);
  return fs::path(out_dir) / name;
}

fs::path Context::out_table(const std::string& stem) const { return out(stem + (json() ? ".json" : ".csv")); }

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ConfigError(what + ": no such file or directory: " + p.string());
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
  if (!out) throw Error(p.string() + ": write failed");
}

void write_json(const fs::path& p, const nlohmann::json& j) { write_text(p, j.dump(2) + "\n"); }

}  // namespace edgewear::cli

int main(int argc, char** argv) {
  using namespace edgewear;
  CLI::App app{"edgewear: wearable voice assistant toolkit and simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.3.0");
  cli::Context ctx;
  app.add_option("--seed", ctx.seed, "Seed for every random choice (default: per command)");
  app.add_option("--out-dir", ctx.out_dir, "Directory for output artifacts")->capture_default_str();
  app.add_option("--format", ctx.format, "Table format for artifacts")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  cli::add_dataset_commands(app, ctx);
  cli::add_kws_commands(app, ctx);
  cli::add_intent_commands(app, ctx);
  cli::add_codec_commands(app, ctx);
  cli::add_sim_commands(app, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& [sub, fn] : ctx.actions) {
      if (sub->parsed()) return fn();
    }
    std::cerr << "error: no command selected\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
