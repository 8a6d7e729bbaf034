// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "radner/cli/cli.hpp"
#include "radner/core/bio.hpp"
#include "radner/core/corpus_io.hpp"
#include "radner/datagen/datagen.hpp"
#include "radner/eval/eval.hpp"
#include "radner/gazetteer/gazetteer.hpp"
#include "radner/neural/trainer.hpp"
#include "radner/ruler/ruler.hpp"
#include "support/oracles.hpp"
#include "support/support.hpp"

using namespace radner;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<double> flatten(const neural::TaggerParams& p) {
  std::vector<double> out;
  p.for_each([&](const std::string&, Eigen::Map<const neural::Matrix> m) {
    out.insert(out.end(), m.data(), m.data() + m.size());
  });
  return out;
}

// Pairwise check, independent of set_annotations.
bool non_overlapping(const Corpus& corpus, const std::string& source) {
  for (const auto& doc : corpus.documents) {
    auto it = doc.annotations.find(source);
    if (it == doc.annotations.end()) return false;
    const auto& m = it->second;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = i + 1; j < m.size(); ++j)
        if (m[i].sentence == m[j].sentence && m[i].span.overlaps(m[j].span)) return false;
  }
  return true;
}

double f1_of(const Corpus& corpus, const std::string& system) {
  return eval::score_strict(corpus, "gold", system).all.f1;
}

const textproc::Pipeline& pipeline() {
  static const auto p = textproc::Pipeline::load_stock();
  return p;
}

// ---- 1 ----------------------------------------------------------------------

Outcome scorer_arithmetic() {
  Outcome o;
  const auto start = Clock::now();
  const auto a = eval::format_score(eval::f1_score(0.94, 0.96));
  const auto b = eval::format_score(eval::f1_score(0.99, 0.95));
  const double elapsed = seconds_since(start);
  o.require(a == "0.95", "F1(0.94,0.96) rendered " + a);
  o.require(b == "0.97", "F1(0.99,0.95) rendered " + b);
  o.require(elapsed < 1e-3, fmt::format("took {:.6f} s", elapsed));
  o.detail = o.pass ? fmt::format("0.95 and 0.97 in {:.1f} us", elapsed * 1e6) : o.detail;
  return o;
}

// ---- 2 ----------------------------------------------------------------------

Outcome crf_oracles() {
  Outcome o;
  Rng rng(2024);
  std::size_t logz_ok = 0, viterbi_ok = 0;
  double worst = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto n = static_cast<Eigen::Index>(1 + rng.below(5));
    const auto l = static_cast<Eigen::Index>(1 + rng.below(5));
    const auto e = test::random_matrix(n, l, rng, 3.0);
    const auto a = test::random_matrix(l + 2, l + 2, rng, 3.0);
    const double diff = std::abs(neural::log_partition(e, a) - test::brute_log_partition(e, a));
    worst = std::max(worst, diff);
    logz_ok += diff < 1e-8;
    viterbi_ok += neural::viterbi_decode(e, a).labels == test::brute_argmax(e, a, {}).labels;
  }
  o.require(logz_ok == trials, fmt::format("logZ matched {}/{}", logz_ok, trials));
  o.require(viterbi_ok == trials, fmt::format("Viterbi matched {}/{}", viterbi_ok, trials));
  if (o.pass) o.detail = fmt::format("{} trials, max |logZ diff| {:.2e}", trials, worst);
  return o;
}

// ---- 3 ----------------------------------------------------------------------

Outcome full_gradients() {
  Outcome o;
  Rng rng(33);
  const int instances = 25;
  double worst = 0.0;
  for (int t = 0; t < instances; ++t) {
    neural::Dims d;
    d.words = 6;
    d.chars = 5;
    d.labels = 2 + rng.below(4);
    d.word_dim = 3;
    d.char_dim = 2;
    d.char_hidden = 2;
    d.word_hidden = 3;
    auto p = neural::TaggerParams::init(d, rng);
    p.for_each([&](const std::string&, Eigen::Map<neural::Matrix> m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-0.8, 0.8);
    });
    std::vector<neural::TokenFeatures> features(1 + rng.below(4));
    for (auto& f : features) {
      f.word = rng.below(d.words);
      f.chars.resize(1 + rng.below(4));
      for (auto& c : f.chars) c = rng.below(d.chars);
    }
    std::vector<std::size_t> gold(features.size());
    for (auto& y : gold) y = rng.below(d.labels);

    auto grad = p.zeros_like();
    neural::sentence_loss(features, gold, p, &grad);
    std::vector<double> numeric;
    p.for_each([&](const std::string&, Eigen::Map<neural::Matrix> m) {
      auto part = test::central_differences(m.data(), static_cast<std::size_t>(m.size()),
                                            [&] { return neural::sentence_loss(features, gold, p, nullptr); });
      numeric.insert(numeric.end(), part.begin(), part.end());
    });
    worst = std::max(worst, test::relative_error(flatten(grad), numeric));
  }
  o.require(worst < 1e-4, fmt::format("worst relative error {:.2e}", worst));
  if (o.pass) o.detail = fmt::format("{} instances, worst relative error {:.2e}", instances, worst);
  return o;
}

// ---- 4 ----------------------------------------------------------------------

Outcome memorization() {
  Outcome o;
  const auto corpus = read_corpus(fs::path(RADNER_TEST_FIXTURES) / "memorize.conll", CorpusFormat::conll);
  std::size_t sentences = 0;
  for (const auto& d : corpus.documents) sentences += d.sentences.size();
  o.require(sentences == 30, fmt::format("fixture has {} sentences", sentences));

  auto config = neural::load_train_config(textproc::stock_data_dir() / "neural" / "default.json");
  config.epochs = 60;
  const auto first = neural::train_tagger(corpus, Corpus{}, config);
  const auto second = neural::train_tagger(corpus, Corpus{}, config);

  Corpus predicted = corpus;
  for (auto& doc : predicted.documents) neural::predict_neural(doc, first);
  const double f1 = f1_of(predicted, neural::kSource);
  o.require(f1 == 1.0, fmt::format("training-set F1 {:.4f}", f1));
  bool identical = first.models.size() == second.models.size();
  for (std::size_t i = 0; identical && i < first.models.size(); ++i)
    identical = flatten(first.models[i].params) == flatten(second.models[i].params);
  o.require(identical, "two runs with the same seed differ");
  if (o.pass)
    o.detail = fmt::format("{} mode, {} models, 60 epochs: F1 {:.2f}, identical reruns",
                           neural::to_string(config.mode), first.models.size(), f1);
  return o;
}

// ---- 5 ----------------------------------------------------------------------

struct Benchmark {
  Corpus test;  // annotated by all three systems
};

Outcome benchmark(Benchmark& out) {
  Outcome o;
  auto gen = datagen::load_stock_gen_config();
  gen.reports = 700;
  gen.targets.clear();
  gen.seed = 11;
  const auto corpus = datagen::generate_corpus(gen, pipeline());
  auto [dev, test] = datagen::split_corpus(corpus, 500.0 / 700.0, 11);
  o.require(dev.documents.size() == 500 && test.documents.size() == 200, "split sizes differ from 500/200");

  const auto rules = ruler::RuleSet::load_stock();
  for (auto& doc : test.documents) ruler::annotate_rule_based(doc, rules, pipeline());

  auto config = neural::load_train_config(textproc::stock_data_dir() / "neural" / "default.json");
  config.mode = neural::Mode::monolithic;
  config.epochs = 4;
  const auto bundle = neural::train_tagger(dev, Corpus{}, config);
  for (auto& doc : test.documents) neural::predict_neural(doc, bundle);

  const auto resources = gazetteer::ConceptResources::load_stock();
  const auto model = gazetteer::train_disambiguator(dev, resources, gazetteer::DisambiguatorConfig{});
  for (auto& doc : test.documents) gazetteer::annotate_gazetteer(doc, resources, model);

  const double rf = f1_of(test, ruler::kSource.data());
  const double nf = f1_of(test, neural::kSource);
  const double gf = f1_of(test, gazetteer::kSource);
  o.require(rf >= 0.95, fmt::format("ruler F1 {:.4f} < 0.95", rf));
  o.require(nf >= 0.80, fmt::format("neural F1 {:.4f} < 0.80", nf));
  o.require(gf >= 0.80, fmt::format("gazetteer F1 {:.4f} < 0.80", gf));
  o.require(rf >= nf && rf >= gf, fmt::format("ruler {:.4f} below a learned system", rf));
  o.detail = fmt::format("ruler {:.4f}, neural {:.4f}, gazetteer {:.4f}", rf, nf, gf) +
             (o.detail.empty() ? "" : " (" + o.detail + ")");
  out.test = std::move(test);
  return o;
}

// ---- 6 ----------------------------------------------------------------------

Outcome five_runs() {
  Outcome o;
  const auto dir = fs::temp_directory_path() / "radner_acceptance_runs";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto gen = datagen::load_stock_gen_config();
  gen.reports = 30;
  gen.targets.clear();
  gen.seed = 5;
  const auto corpus = datagen::generate_corpus(gen, pipeline());
  auto [train, test] = datagen::split_corpus(corpus, 0.7, 5);
  write_corpus(train, dir / "train.jsonl", CorpusFormat::jsonl);
  write_corpus(test, dir / "test.jsonl", CorpusFormat::jsonl);
  const char* config_text = R"({"mode":"bag","word_dim":16,"char_dim":8,"char_hidden":8,"word_hidden":16,
    "learning_rate":0.01,"epochs":3,"seed":1,"types":["ischaemic_stroke","time_old","loc_deep"]})";
  std::ofstream(dir / "config.json") << config_text;

  auto invoke = [&](const fs::path& out) {
    const std::vector<std::string> args = {"radner", "evaluate", "--gold", "gold", "--system", "neural",
                                           "--runs", "5", "--in", (dir / "test.jsonl").string(), "--train",
                                           (dir / "train.jsonl").string(), "--config",
                                           (dir / "config.json").string(), "--out", out.string()};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream sink_out, sink_err;
    return cli::run_cli(static_cast<int>(argv.size()), argv.data(), sink_out, sink_err);
  };
  const int c1 = invoke(dir / "a.json");
  const int c2 = invoke(dir / "b.json");
  o.require(c1 == 0 && c2 == 0, fmt::format("exit codes {} and {}", c1, c2));
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const auto a = slurp(dir / "a.json");
  o.require(!a.empty() && a == slurp(dir / "b.json"), "reports differ between invocations");

  // Independent recomputation of the cell-wise mean.
  auto config = neural::train_config_from_json(nlohmann::json::parse(config_text));
  std::vector<eval::EvalReport> runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    config.seed = seed;
    const auto bundle = neural::train_tagger(train, Corpus{}, config);
    Corpus predicted = test;
    predicted.name = "test";
    for (auto& doc : predicted.documents) neural::predict_neural(doc, bundle);
    runs.push_back(eval::score_strict(predicted, "gold", neural::kSource));
  }
  if (!a.empty()) {
    const auto report = eval::report_from_json(nlohmann::json::parse(a));
    o.require(report.averaged && report.runs == 5, "report is not a 5-run average");
    bool means = true;
    auto mean_of = [&](auto pick) {
      double s = 0.0;
      for (const auto& r : runs) s += pick(r);
      return s / 5.0;
    };
    means = means && report.all.f1 == mean_of([](const eval::EvalReport& r) { return r.all.f1; });
    means = means && report.all.precision == mean_of([](const eval::EvalReport& r) { return r.all.precision; });
    for (std::size_t t = 0; t < kNumEntityTypes; ++t)
      means = means && report.per_type[t].recall == mean_of([t](const eval::EvalReport& r) { return r.per_type[t].recall; });
    o.require(means, "report differs from the mean of 5 seeded runs");
    if (o.pass) o.detail = fmt::format("mean F1 {:.4f} over seeds 1..5, byte-identical reruns", report.all.f1);
  }
  fs::remove_all(dir);
  return o;
}

// ---- 7 ----------------------------------------------------------------------

Outcome iaa_symmetry() {
  Outcome o;
  Rng rng(7);
  std::size_t ok = 0;
  for (int t = 0; t < 100; ++t) {
    Corpus c{"pairs", {}};
    const std::size_t docs = 1 + rng.below(4);
    for (std::size_t d = 0; d < docs; ++d) {
      auto doc = test::random_document("d" + std::to_string(d), rng, 4, 10);
      set_annotations(doc, "A", test::random_mentions(doc, rng, 0.3));
      set_annotations(doc, "B", test::random_mentions(doc, rng, 0.3));
      if (rng.uniform() < 0.5) doc.annotations["B"] = doc.annotations["A"];
      c.documents.push_back(std::move(doc));
    }
    const auto ab = eval::compute_iaa(c, "A", "B");
    const auto ba = eval::compute_iaa(c, "B", "A");
    bool same = ab.all.precision == ba.all.recall && ab.all.recall == ba.all.precision && ab.all.f1 == ba.all.f1;
    for (std::size_t k = 0; k < kNumEntityTypes; ++k)
      same = same && ab.per_type[k].precision == ba.per_type[k].recall &&
             ab.per_type[k].recall == ba.per_type[k].precision && ab.per_type[k].f1 == ba.per_type[k].f1;
    ok += same;
  }
  o.require(ok == 100, fmt::format("{}/100 pairs symmetric", ok));
  if (o.pass) o.detail = "100/100 pairs: P and R swap, F1 identical";
  return o;
}

// ---- 8 ----------------------------------------------------------------------

Outcome invariants(const Benchmark& bench) {
  Outcome o;
  Rng rng(8);

  std::size_t bio_fail = 0;
  for (int t = 0; t < 5000; ++t) {
    const std::size_t n = rng.below(12);
    std::vector<TypedSpan> spans;
    for (std::size_t pos = 0; pos < n;) {
      if (rng.uniform() < 0.4) {
        const std::size_t len = 1 + rng.below(std::min<std::size_t>(4, n - pos));
        spans.push_back({test::random_type(rng), {pos, pos + len}});
        pos += len;
      } else {
        ++pos;
      }
    }
    bio_fail += bio_decode(bio_encode(n, spans), false) != spans;
  }
  o.require(bio_fail == 0, fmt::format("{} BIO round-trip failures", bio_fail));

  std::size_t io_fail = 0;
  for (int t = 0; t < 200; ++t) {
    Corpus c{"c", {}};
    for (std::size_t d = 0, docs = 1 + rng.below(4); d < docs; ++d) {
      auto doc = test::random_document("doc" + std::to_string(d), rng);
      set_annotations(doc, "gold", test::random_mentions(doc, rng));
      c.documents.push_back(std::move(doc));
    }
    for (auto format : {CorpusFormat::jsonl, CorpusFormat::conll}) {
      std::ostringstream out;
      write_corpus(c, out, format);
      std::istringstream in(out.str());
      io_fail += read_corpus(in, format, "c") != c;
    }
  }
  std::ostringstream bench_out;
  write_corpus(bench.test, bench_out, CorpusFormat::jsonl);
  std::istringstream bench_in(bench_out.str());
  io_fail += read_corpus(bench_in, CorpusFormat::jsonl, bench.test.name) != bench.test;
  o.require(io_fail == 0, fmt::format("{} corpus I/O round-trip failures", io_fail));

  for (const char* source : {"ruler", "neural", "gazetteer"})
    o.require(non_overlapping(bench.test, source), std::string("overlapping mentions from ") + source);

  const auto zero = eval::make_cell(0, 0, 0);
  const auto fn_only = eval::make_cell(0, 0, 3);
  const auto fp_only = eval::make_cell(0, 2, 0);
  o.require(zero.precision == 0.0 && zero.recall == 0.0 && zero.f1 == 0.0 && !zero.present,
            "empty cell is not all zero");
  o.require(fn_only.precision == 0.0 && fn_only.recall == 0.0 && fn_only.f1 == 0.0, "FN-only cell not zero");
  o.require(fp_only.precision == 0.0 && fp_only.recall == 0.0 && fp_only.f1 == 0.0, "FP-only cell not zero");
  o.require(eval::f1_score(0.0, 0.0) == 0.0, "F1(0,0) is not 0");
  if (o.pass) o.detail = "BIO, corpus I/O, non-overlap (3 systems), zero denominators";
  return o;
}

}  // namespace

int main() {
  bool all = true;
  auto report = [&](int id, const char* name, double limit, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = seconds_since(start);
    if (limit > 0 && elapsed >= limit) {
      o.pass = false;
      o.detail += fmt::format(" (over the {:.0f} s limit)", limit);
    }
    all = all && o.pass;
    std::cout << fmt::format("{} [{}] {}: {} ({:.2f} s)", o.pass ? "PASS" : "FAIL", id, name, o.detail, elapsed)
              << std::endl;
  };

  Benchmark bench;
  report(1, "scorer arithmetic", 0, scorer_arithmetic);
  report(2, "CRF oracle equivalence", 30, crf_oracles);
  report(3, "full-network gradient check", 60, full_gradients);
  report(4, "memorization fixture", 180, memorization);
  report(5, "synthetic end-to-end benchmark", 600, [&] { return benchmark(bench); });
  report(6, "5-run protocol", 0, five_runs);
  report(7, "IAA annotator symmetry", 0, iaa_symmetry);
  report(8, "invariant suites", 60, [&] { return invariants(bench); });
  return all ? 0 : 1;
}
