#include "radner/cli/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "radner/core/corpus_io.hpp"
#include "radner/core/corpus_ops.hpp"
#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/datagen/datagen.hpp"
#include "radner/eval/eval.hpp"
#include "radner/gazetteer/gazetteer.hpp"
#include "radner/neural/trainer.hpp"
#include "radner/ruler/ruler.hpp"

namespace radner::cli {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// Bad flag values or configuration keys.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

Corpus load(const fs::path& path, const std::string& conll_source = "gold") {
  return read_corpus(path, format_from_path(path), {conll_source});
}

void save(const Corpus& corpus, const fs::path& path, const std::string& conll_source) {
  write_corpus(corpus, path, format_from_path(path), {conll_source});
}

textproc::Pipeline make_pipeline(const std::string& dir) {
  return dir.empty() ? textproc::Pipeline::load_stock() : textproc::Pipeline::load(dir);
}

void ensure_processed(Corpus& corpus, const textproc::Pipeline& pipeline) {
  for (auto& doc : corpus.documents)
    if (doc.sentences.empty() && !doc.raw_text.empty()) pipeline.process(doc);
}

void emit(const std::string& text, const std::string& out_path, Streams io) {
  if (out_path.empty()) {
    io.out << text;
    return;
  }
  std::ofstream f(out_path);
  f << text;
  if (!f) throw IoError("cannot write " + out_path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

template <typename Fn>
auto as_usage(Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

// ---- annotate ---------------------------------------------------------------

struct AnnotateArgs {
  std::string system, in, out, ruleset, model, resources, textproc;
};

void annotate(const AnnotateArgs& a, Streams io) {
  auto corpus = load(a.in);
  const auto pipeline = make_pipeline(a.textproc);
  std::string source;
  if (a.system == "ruler") {
    const auto rules = a.ruleset.empty() ? ruler::RuleSet::load_stock() : ruler::RuleSet::load_dir(a.ruleset);
    std::vector<std::string> diagnostics;
    for (auto& doc : corpus.documents) {
      diagnostics.clear();
      ruler::annotate_rule_based(doc, rules, pipeline, &diagnostics);
      for (const auto& d : diagnostics) io.err << d << '\n';
    }
    source = std::string(ruler::kSource);
  } else if (a.system == "neural") {
    if (a.model.empty()) throw UsageError("--system neural needs --model <bundle dir>");
    const auto bundle = neural::load_bundle(a.model);
    ensure_processed(corpus, pipeline);
    for (auto& doc : corpus.documents) neural::predict_neural(doc, bundle);
    source = neural::kSource;
  } else {
    const auto resources = a.resources.empty() ? gazetteer::ConceptResources::load_stock()
                                               : gazetteer::ConceptResources::load_dir(a.resources);
    const auto model = a.model.empty() ? gazetteer::DisambiguationModel{} : gazetteer::load_model(a.model);
    ensure_processed(corpus, pipeline);
    for (auto& doc : corpus.documents) gazetteer::annotate_gazetteer(doc, resources, model);
    source = gazetteer::kSource;
  }
  save(corpus, a.out, source);
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string train, dev, config, out, resources, textproc, mode, gold;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, threads;
  std::optional<double> learning_rate;
};

neural::TrainConfig neural_config(const TrainArgs& a) {
  return as_usage([&] {
    auto c = a.config.empty() ? neural::TrainConfig{} : neural::train_config_from_json(read_json(a.config));
    if (a.seed) c.seed = a.seed;
    if (a.epochs) c.epochs = *a.epochs;
    if (a.threads) c.threads = *a.threads;
    if (a.learning_rate) c.learning_rate = *a.learning_rate;
    if (!a.mode.empty()) c.mode = neural::parse_mode(a.mode);
    if (!a.gold.empty()) c.gold_source = a.gold;
    c.validate();
    return c;
  });
}

neural::TrainLogger epoch_logger(std::ostream& err) {
  return [&err](const neural::EpochLog& e) {
    err << fmt::format("[{}] epoch {:>3}  loss {:.6f}  dev F1 {:.4f}\n",
                       e.type ? std::string(to_string(*e.type)) : std::string("joint"), e.epoch, e.mean_loss,
                       e.dev_f1);
  };
}

void train_neural(const TrainArgs& a, Streams io) {
  const auto config = neural_config(a);
  const auto pipeline = make_pipeline(a.textproc);
  auto train = load(a.train, config.gold_source);
  auto dev = a.dev.empty() ? Corpus{} : load(a.dev, config.gold_source);
  ensure_processed(train, pipeline);
  ensure_processed(dev, pipeline);
  const auto bundle = neural::train_tagger(train, dev, config, epoch_logger(io.err));
  neural::save_bundle(bundle, a.out);
}

void train_gazetteer(const TrainArgs& a, Streams io) {
  const auto config = as_usage([&] {
    auto c = a.config.empty() ? gazetteer::DisambiguatorConfig{}
                              : gazetteer::disambiguator_config_from_json(read_json(a.config));
    if (a.epochs) c.epochs = *a.epochs;
    if (a.learning_rate) c.learning_rate = *a.learning_rate;
    if (!a.gold.empty()) c.gold_source = a.gold;
    return c;
  });
  const auto pipeline = make_pipeline(a.textproc);
  const auto resources = a.resources.empty() ? gazetteer::ConceptResources::load_stock()
                                             : gazetteer::ConceptResources::load_dir(a.resources);
  auto train = load(a.train, config.gold_source);
  ensure_processed(train, pipeline);
  const auto model = gazetteer::train_disambiguator(train, resources, config);
  for (const auto& [id, clf] : model.concepts)
    io.err << id << ": " << (clf.trained ? "trained" : "untrained (falls back to map order)") << '\n';
  if (!a.dev.empty()) {
    auto dev = load(a.dev, config.gold_source);
    ensure_processed(dev, pipeline);
    for (auto& doc : dev.documents) gazetteer::annotate_gazetteer(doc, resources, model);
    const auto report = eval::score_strict(dev, config.gold_source, gazetteer::kSource);
    io.err << "dev F1 " << eval::format_score(report.all.f1) << '\n';
  }
  gazetteer::save_model(model, a.out);
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string gold, system, in, out, train, dev, config, textproc, name;
  std::size_t runs = 1;
};

void evaluate(const EvaluateArgs& a, Streams io) {
  if (a.runs == 0) throw UsageError("--runs must be positive");
  auto corpus = load(a.in, a.gold);
  if (!a.name.empty()) corpus.name = a.name;
  eval::EvalReport report;
  if (!a.train.empty()) {
    if (a.system != neural::kSource) throw UsageError("retraining with --train is only supported for the neural system");
    TrainArgs t;
    t.config = a.config;
    t.gold = a.gold;
    t.seed = 1;
    auto config = neural_config(t);
    const auto pipeline = make_pipeline(a.textproc);
    auto train = load(a.train, a.gold);
    auto dev = a.dev.empty() ? Corpus{} : load(a.dev, a.gold);
    ensure_processed(train, pipeline);
    ensure_processed(dev, pipeline);
    ensure_processed(corpus, pipeline);
    std::vector<eval::EvalReport> runs;
    for (std::size_t seed = 1; seed <= a.runs; ++seed) {
      config.seed = seed;
      io.err << "run " << seed << " of " << a.runs << '\n';
      const auto bundle = neural::train_tagger(train, dev, config, epoch_logger(io.err));
      Corpus predicted = corpus;
      for (auto& doc : predicted.documents) neural::predict_neural(doc, bundle);
      runs.push_back(eval::score_strict(predicted, a.gold, neural::kSource));
    }
    report = a.runs == 1 ? runs.front() : eval::aggregate_runs(runs);
  } else if (a.runs == 1) {
    report = eval::score_strict(corpus, a.gold, a.system);
  } else {
    std::vector<eval::EvalReport> runs;
    for (std::size_t i = 1; i <= a.runs; ++i) runs.push_back(eval::score_strict(corpus, a.gold, fmt::format("{}.{}", a.system, i)));
    report = eval::aggregate_runs(runs);
  }
  emit(eval::to_json(report).dump(2) + "\n", a.out, io);
}

// ---- remaining subcommands --------------------------------------------------

void iaa(const std::string& a, const std::string& b, const std::string& in, const std::string& out, Streams io) {
  const auto corpus = load(in, a);
  ordered_json j;
  j[a + "_vs_" + b] = eval::to_json(eval::compute_iaa(corpus, a, b));
  j[b + "_vs_" + a] = eval::to_json(eval::compute_iaa(corpus, b, a));
  emit(j.dump(2) + "\n", out, io);
}

void compare(const std::vector<std::string>& files, const std::string& iaa_file, bool tsv, const std::string& out,
             Streams io) {
  auto read_report = [](const std::string& path) {
    try {
      return eval::report_from_json(read_json(path));
    } catch (const InvalidArgument& e) {
      throw FormatError(path + ": " + e.what());
    }
  };
  std::vector<eval::EvalReport> reports;
  for (const auto& f : files) reports.push_back(read_report(f));
  std::optional<eval::EvalReport> iaa_report;
  if (!iaa_file.empty()) iaa_report = read_report(iaa_file);
  emit(eval::compare_systems(reports, iaa_report ? &*iaa_report : nullptr,
                             tsv ? eval::TableFormat::tsv : eval::TableFormat::text),
       out, io);
}

struct DatagenArgs {
  std::string config, out, textproc;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reports;
};

void datagen(const DatagenArgs& a) {
  auto config = as_usage([&] {
    auto c = a.config.empty() ? datagen::load_stock_gen_config() : datagen::gen_config_from_json(read_json(a.config));
    if (a.seed) c.seed = *a.seed;
    if (a.reports) c.reports = *a.reports;
    c.validate();
    return c;
  });
  save(datagen::generate_corpus(config, make_pipeline(a.textproc)), a.out, datagen::kGoldSource);
}

void split_corpus_files(const std::string& in, double fraction, std::uint64_t seed, const std::string& dev_out,
           const std::string& test_out) {
  const auto corpus = load(in);
  auto [dev, test] = as_usage([&] { return datagen::split_corpus(corpus, fraction, seed); });
  save(dev, dev_out, "gold");
  save(test, test_out, "gold");
}

void stats(const std::string& in, const std::string& source, Streams io) {
  const auto s = corpus_stats(load(in, source), source);
  ordered_json j;
  j["reports"] = s.reports;
  j["sentences"] = s.sentences;
  j["entities"] = s.entities;
  ordered_json per_type = ordered_json::object();
  for (auto t : all_entity_types()) per_type[std::string(to_string(t))] = s.per_type[index_of(t)];
  j["per_type"] = per_type;
  io.out << j.dump(2) << '\n';
}

void filter(const std::string& keywords, const std::string& in, const std::string& out) {
  std::vector<std::string> patterns;
  for (const auto& k : split(keywords, ',')) {
    auto t = trim(k);
    if (!t.empty()) patterns.emplace_back(t);
  }
  const auto corpus = load(in);
  const auto kept = as_usage([&] { return filter_corpus(corpus, patterns); });
  save(kept, out, "gold");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Streams io{out, err};
  CLI::App app{"Radiology report named-entity recognition toolkit", "radner"};
  app.require_subcommand(1);

  AnnotateArgs ann;
  auto* annotate_cmd = app.add_subcommand("annotate", "Annotate a corpus with one of the systems");
  annotate_cmd->add_option("--system", ann.system, "ruler, neural or gazetteer")
      ->required()
      ->check(CLI::IsMember({"ruler", "neural", "gazetteer"}));
  annotate_cmd->add_option("--in", ann.in, "Input corpus (.jsonl or .conll)")->required();
  annotate_cmd->add_option("--out", ann.out, "Output corpus")->required();
  annotate_cmd->add_option("--ruleset", ann.ruleset, "Rule-set directory (lexicon.tsv, rules.dsl)");
  annotate_cmd->add_option("--model", ann.model, "Neural bundle directory or disambiguator model file");
  annotate_cmd->add_option("--resources", ann.resources, "Gazetteer directory (dictionary.tsv, concept_map.tsv)");
  annotate_cmd->add_option("--textproc", ann.textproc, "Text-processing resource directory");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the neural tagger or the gazetteer disambiguator");
  std::string train_target;
  train_cmd->add_option("target", train_target, "neural or gazetteer")
      ->required()
      ->check(CLI::IsMember({"neural", "gazetteer"}));
  train_cmd->add_option("--train", tr.train, "Training corpus")->required();
  train_cmd->add_option("--dev", tr.dev, "Development corpus");
  train_cmd->add_option("--config", tr.config, "JSON configuration");
  train_cmd->add_option("--out", tr.out, "Output bundle directory (neural) or model file (gazetteer)")->required();
  train_cmd->add_option("--seed", tr.seed, "Random seed");
  train_cmd->add_option("--epochs", tr.epochs, "Training epochs");
  train_cmd->add_option("--learning-rate", tr.learning_rate, "Learning rate");
  train_cmd->add_option("--mode", tr.mode, "bag or monolithic")->check(CLI::IsMember({"bag", "monolithic"}));
  train_cmd->add_option("--threads", tr.threads, "Worker threads for bag mode");
  train_cmd->add_option("--gold", tr.gold, "Gold annotation source");
  train_cmd->add_option("--resources", tr.resources, "Gazetteer resource directory");
  train_cmd->add_option("--textproc", tr.textproc, "Text-processing resource directory");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Strict span-level scoring");
  evaluate_cmd->add_option("--gold", ev.gold, "Reference annotation source")->required();
  evaluate_cmd->add_option("--system", ev.system, "System annotation source")->required();
  evaluate_cmd->add_option("--in", ev.in, "Annotated corpus")->required();
  evaluate_cmd->add_option("--runs", ev.runs, "Average over k runs (seeds 1..k)");
  evaluate_cmd->add_option("--train", ev.train, "Retrain the neural system per run on this corpus");
  evaluate_cmd->add_option("--dev", ev.dev, "Development corpus for retraining");
  evaluate_cmd->add_option("--config", ev.config, "Neural training configuration for retraining");
  evaluate_cmd->add_option("--textproc", ev.textproc, "Text-processing resource directory");
  evaluate_cmd->add_option("--name", ev.name, "Corpus label stored in the report (default: file stem)");
  evaluate_cmd->add_option("--out", ev.out, "Write the JSON report here instead of standard output");

  std::string iaa_a, iaa_b, iaa_in, iaa_out;
  auto* iaa_cmd = app.add_subcommand("iaa", "Inter-annotator agreement in both orientations");
  iaa_cmd->add_option("--a", iaa_a, "First annotator source")->required();
  iaa_cmd->add_option("--b", iaa_b, "Second annotator source")->required();
  iaa_cmd->add_option("--in", iaa_in, "Corpus carrying both sources")->required();
  iaa_cmd->add_option("--out", iaa_out, "Output file");

  std::vector<std::string> report_files;
  std::string cmp_iaa, cmp_out;
  bool cmp_tsv = false;
  auto* compare_cmd = app.add_subcommand("compare", "Side-by-side table of evaluation reports");
  compare_cmd->add_option("--reports", report_files, "Report files from evaluate")->required();
  compare_cmd->add_option("--iaa", cmp_iaa, "Agreement report shown as a trailing IAA group");
  compare_cmd->add_flag("--tsv", cmp_tsv, "Tab-separated output");
  compare_cmd->add_option("--out", cmp_out, "Output file");

  DatagenArgs gen;
  auto* datagen_cmd = app.add_subcommand("datagen", "Generate a synthetic annotated corpus");
  datagen_cmd->add_option("--config", gen.config, "Generator configuration (default: stock)");
  datagen_cmd->add_option("--out", gen.out, "Output corpus")->required();
  datagen_cmd->add_option("--seed", gen.seed, "Random seed");
  datagen_cmd->add_option("--reports", gen.reports, "Number of reports");
  datagen_cmd->add_option("--textproc", gen.textproc, "Text-processing resource directory");

  std::string split_in, split_dev, split_test;
  double split_fraction = 0.5;
  std::uint64_t split_seed = 1;
  auto* split_cmd = app.add_subcommand("split", "Seeded document-level split into dev and test parts");
  split_cmd->add_option("--in", split_in, "Input corpus")->required();
  split_cmd->add_option("--fraction", split_fraction, "Share of documents in the dev part")->required();
  split_cmd->add_option("--seed", split_seed, "Random seed");
  split_cmd->add_option("--dev-out", split_dev, "Dev corpus")->required();
  split_cmd->add_option("--test-out", split_test, "Test corpus")->required();

  std::string stats_in, stats_source = "gold";
  auto* stats_cmd = app.add_subcommand("stats", "Report, sentence and entity counts");
  stats_cmd->add_option("--in", stats_in, "Corpus")->required();
  stats_cmd->add_option("--source", stats_source, "Annotation source");

  std::string keywords, filter_in, filter_out;
  auto* filter_cmd = app.add_subcommand("filter", "Keep reports mentioning any keyword");
  filter_cmd->add_option("--keywords", keywords, "Comma-separated keywords; trailing * for prefixes")->required();
  filter_cmd->add_option("--in", filter_in, "Input corpus")->required();
  filter_cmd->add_option("--out", filter_out, "Output corpus")->required();

  if (argc <= 1) {
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*annotate_cmd) annotate(ann, io);
    else if (*train_cmd) train_target == "neural" ? train_neural(tr, io) : train_gazetteer(tr, io);
    else if (*evaluate_cmd) evaluate(ev, io);
    else if (*iaa_cmd) iaa(iaa_a, iaa_b, iaa_in, iaa_out, io);
    else if (*compare_cmd) compare(report_files, cmp_iaa, cmp_tsv, cmp_out, io);
    else if (*datagen_cmd) datagen(gen);
    else if (*split_cmd) split_corpus_files(split_in, split_fraction, split_seed, split_dev, split_test);
    else if (*stats_cmd) stats(stats_in, stats_source, io);
    else if (*filter_cmd) filter(keywords, filter_in, filter_out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace radner::cli
