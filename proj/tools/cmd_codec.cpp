#include <iostream>

#include "cli.hpp"
#include "edgewear/audio/adpcm.hpp"
#include "edgewear/audio/resample.hpp"
#include "edgewear/audio/wav.hpp"

namespace edgewear::cli {

void add_codec_commands(CLI::App& app, Context& ctx) {
  auto* cd = app.add_subcommand("codec", "IMA-ADPCM file conversion");
  cd->require_subcommand(1);

  {
    auto* c = cd->add_subcommand("encode", "WAV -> .ima (16 kHz mono, 320-sample blocks)");
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    c->add_option("input", *input, "WAV file")->required();
    c->add_option("output", *output, ".ima file")->required();
    ctx.on(c, [input, output] {
      require_exists(*input, "input");
      auto pcm = audio::read_wav(*input, {.downmix_stereo = true});
      if (pcm.sample_rate_hz != audio::kCanonicalRateHz) pcm = audio::resample(pcm, audio::kCanonicalRateHz);
      const auto bytes = audio::write_ima_stream(pcm);
      audio::write_file_bytes(*output, bytes);
      const auto pcm_bytes = audio::serialize_wav(pcm).size();
      std::cout << pcm.samples.size() << " samples, " << pcm_bytes << " -> " << bytes.size() << " bytes (ratio "
                << static_cast<double>(pcm_bytes) / static_cast<double>(bytes.size()) << ")\n";
      return 0;
    });
  }

  {
    auto* c = cd->add_subcommand("decode", ".ima -> WAV");
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    c->add_option("input", *input, ".ima file")->required();
    c->add_option("output", *output, "WAV file")->required();
    ctx.on(c, [input, output] {
      require_exists(*input, "input");
      const auto pcm = audio::read_ima_stream(audio::read_file_bytes(*input));
      audio::write_wav(pcm, *output);
      std::cout << pcm.samples.size() << " samples at " << pcm.sample_rate_hz << " Hz\n";
      return 0;
    });
  }
}

}  // namespace edgewear::cli
