#include <chrono>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "edgewear/error.hpp"
#include "edgewear/intent/router.hpp"

namespace edgewear::cli {

void add_intent_commands(CLI::App& app, Context& ctx) {
  auto* in = app.add_subcommand("intent", "Text intent classifier");
  in->require_subcommand(1);

  {
    auto* c = in->add_subcommand("fit", "Fit TF-IDF + softmax regression on a TSV corpus");
    auto corpus = std::make_shared<std::string>("data/intents.tsv");
    auto out = std::make_shared<std::string>();
    auto holdout = std::make_shared<double>(0.2);
    c->add_option("--corpus", *corpus, "TSV with text and label columns")->capture_default_str();
    c->add_option("--out", *out, "Model file (default: <out-dir>/intent.json)");
    c->add_option("--holdout", *holdout, "Held-out fraction for the accuracy report (0 = fit on everything)")
        ->check(CLI::Range(0.0, 0.9))
        ->capture_default_str();
    ctx.on(c, [&ctx, corpus, out, holdout] {
      require_exists(*corpus, "corpus");
      const auto data = intent::load_intent_corpus(*corpus);
      std::vector<intent::LabeledUtterance> train = data, test;
      if (*holdout > 0.0) intent::stratified_split(data, 1.0 - *holdout, ctx.seed_or(1), train, test);
      const auto fitted = intent::fit(train);
      const fs::path dst = out->empty() ? ctx.out("intent.json") : fs::path(*out);
      intent::save_intent_model(fitted.model, dst);
      std::cout << "train: " << train.size() << " utterances, accuracy " << intent::accuracy(fitted.model, train)
                << "\n";
      if (!test.empty()) {
        std::cout << "held-out: " << test.size() << " utterances, accuracy " << intent::accuracy(fitted.model, test)
                  << "\n";
      }
      std::cout << "final loss: " << fitted.loss_history.back() << "\nwrote " << dst.string() << "\n";
      return 0;
    });
  }

  {
    auto* c = in->add_subcommand("classify", "Classify and route utterances");
    auto model = std::make_shared<std::string>("data/models/intent.json");
    auto texts = std::make_shared<std::vector<std::string>>();
    auto input = std::make_shared<std::string>();
    c->add_option("--model", *model, "Intent model file")->capture_default_str();
    c->add_option("text", *texts, "Utterances to classify");
    c->add_option("--input", *input, "File with one utterance per line");
    ctx.on(c, [&ctx, model, texts, input] {
      require_exists(*model, "model");
      std::vector<std::string> all = *texts;
      if (!input->empty()) {
        require_exists(*input, "input");
        std::ifstream f(*input);
        for (std::string line; std::getline(f, line);) {
          if (!line.empty()) all.push_back(line);
        }
      }
      if (all.empty()) throw ConfigError("classify: give utterances or --input");
      const intent::Router router(intent::load_intent_model(*model));
      if (!ctx.json()) std::cout << "text\tintent\tconfidence\tpathway\tmicros\n";
      for (const auto& t : all) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto d = router.handle(t);
        const double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
        if (ctx.json()) {
          std::cout << nlohmann::json{{"text", t},
                                      {"intent", intent::intent_name(d.intent)},
                                      {"confidence", d.confidence},
                                      {"pathway", intent::pathway_name(d.pathway)},
                                      {"micros", us}}
                           .dump()
                    << "\n";
        } else {
          std::cout << t << '\t' << intent::intent_name(d.intent) << '\t' << d.confidence << '\t'
                    << intent::pathway_name(d.pathway) << '\t' << us << "\n";
        }
      }
      return 0;
    });
  }
}

}  // namespace edgewear::cli
