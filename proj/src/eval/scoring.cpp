#include <algorithm>
#include <map>
#include <tuple>

#include "radner/core/error.hpp"
#include "radner/eval/eval.hpp"

namespace radner::eval {
namespace {

using Key = std::tuple<std::size_t, std::size_t, std::size_t, EntityType>;  // sentence, start, end, type

struct Counts {
  std::array<std::size_t, kNumEntityTypes> tp{}, fp{}, fn{};
};

void count_document(const std::vector<EntityMention>& gold, const std::vector<EntityMention>& pred, Counts& c) {
  std::map<Key, std::size_t> remaining;
  for (const auto& m : gold) ++remaining[{m.sentence, m.span.start, m.span.end, m.type}];
  for (const auto& m : pred) {
    auto it = remaining.find({m.sentence, m.span.start, m.span.end, m.type});
    if (it != remaining.end() && it->second > 0) {
      --it->second;
      ++c.tp[index_of(m.type)];
    } else {
      ++c.fp[index_of(m.type)];
    }
  }
  for (const auto& [key, left] : remaining) c.fn[index_of(std::get<3>(key))] += left;
}

EvalReport build_report(const Counts& c) {
  EvalReport r;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t t = 0; t < kNumEntityTypes; ++t) {
    r.per_type[t] = make_cell(c.tp[t], c.fp[t], c.fn[t]);
    tp += c.tp[t];
    fp += c.fp[t];
    fn += c.fn[t];
  }
  r.all = make_cell(tp, fp, fn);
  return r;
}

bool corpus_has(const Corpus& corpus, const std::string& source) {
  return std::any_of(corpus.documents.begin(), corpus.documents.end(),
                     [&](const Document& d) { return d.has_source(source); });
}

void require_source(const Corpus& corpus, const std::string& source) {
  if (!corpus.documents.empty() && !corpus_has(corpus, source))
    throw InvalidArgument("annotation source '" + source + "' not present in corpus '" + corpus.name + "'");
}

const std::vector<EntityMention>& mentions_of(const Document& doc, const std::string& source) {
  static const std::vector<EntityMention> kEmpty;
  auto it = doc.annotations.find(source);
  return it == doc.annotations.end() ? kEmpty : it->second;
}

}  // namespace

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

Cell make_cell(std::size_t tp, std::size_t fp, std::size_t fn) {
  Cell c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  c.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  c.f1 = f1_score(c.precision, c.recall);
  c.present = tp + fp + fn > 0;
  return c;
}

EvalReport score_strict(const Corpus& corpus, const std::string& gold, const std::string& system) {
  require_source(corpus, gold);
  require_source(corpus, system);
  Counts counts;
  for (const auto& doc : corpus.documents) {
    if (!doc.has_source(gold)) continue;
    count_document(mentions_of(doc, gold), mentions_of(doc, system), counts);
  }
  auto report = build_report(counts);
  report.corpus = corpus.name;
  report.gold = gold;
  report.system = system;
  return report;
}

EvalReport compute_iaa(const Corpus& corpus, const std::string& a, const std::string& b) {
  require_source(corpus, a);
  require_source(corpus, b);
  Counts counts;
  for (const auto& doc : corpus.documents) {
    if (!doc.has_source(a) || !doc.has_source(b)) continue;
    count_document(mentions_of(doc, a), mentions_of(doc, b), counts);
  }
  auto report = build_report(counts);
  report.corpus = corpus.name;
  report.gold = a;
  report.system = b;
  return report;
}

EvalReport aggregate_runs(std::span<const EvalReport> runs) {
  if (runs.empty()) throw InvalidArgument("cannot aggregate zero runs");
  const auto& first = runs.front();
  for (const auto& r : runs)
    if (r.corpus != first.corpus || r.gold != first.gold)
      throw InvalidArgument("runs disagree on corpus/gold metadata ('" + r.corpus + "'/'" + r.gold + "' vs '" +
                            first.corpus + "'/'" + first.gold + "')");

  // Per-seed system names such as "neural.3" collapse to their common stem.
  std::string system = first.system;
  bool same = std::all_of(runs.begin(), runs.end(), [&](const EvalReport& r) { return r.system == system; });
  if (!same) {
    auto stem = [](const std::string& s) { return s.substr(0, s.rfind('.')); };
    system = stem(first.system);
    for (const auto& r : runs)
      if (stem(r.system) != system)
        throw InvalidArgument("runs come from different systems ('" + r.system + "' vs '" + first.system + "')");
  }

  EvalReport out;
  out.corpus = first.corpus;
  out.gold = first.gold;
  out.system = system;
  out.averaged = true;
  out.runs = runs.size();
  const double k = static_cast<double>(runs.size());
  auto accumulate = [&](Cell& dst, auto pick) {
    for (const auto& r : runs) {
      const Cell& c = pick(r);
      dst.precision += c.precision;
      dst.recall += c.recall;
      dst.f1 += c.f1;
      dst.present = dst.present || c.present;
    }
    dst.precision /= k;
    dst.recall /= k;
    dst.f1 /= k;
  };
  for (std::size_t t = 0; t < kNumEntityTypes; ++t)
    accumulate(out.per_type[t], [t](const EvalReport& r) -> const Cell& { return r.per_type[t]; });
  accumulate(out.all, [](const EvalReport& r) -> const Cell& { return r.all; });
  return out;
}

namespace {

nlohmann::ordered_json cell_json(std::string_view name, const Cell& c, bool averaged) {
  nlohmann::ordered_json j;
  j["type"] = name;
  if (averaged) {
    j["tp"] = nullptr;
    j["fp"] = nullptr;
    j["fn"] = nullptr;
  } else {
    j["tp"] = c.tp;
    j["fp"] = c.fp;
    j["fn"] = c.fn;
  }
  j["precision"] = c.precision;
  j["recall"] = c.recall;
  j["f1"] = c.f1;
  j["present"] = c.present;
  return j;
}

Cell cell_from_json(const nlohmann::json& j) {
  Cell c;
  auto count = [&](const char* key) -> std::size_t { return j.at(key).is_null() ? 0 : j.at(key).get<std::size_t>(); };
  c.tp = count("tp");
  c.fp = count("fp");
  c.fn = count("fn");
  c.precision = j.at("precision").get<double>();
  c.recall = j.at("recall").get<double>();
  c.f1 = j.at("f1").get<double>();
  c.present = j.at("present").get<bool>();
  return c;
}

}  // namespace

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["corpus"] = report.corpus;
  j["gold"] = report.gold;
  j["system"] = report.system;
  j["averaged"] = report.averaged;
  j["runs"] = report.runs;
  j["rows"] = nlohmann::ordered_json::array();
  for (auto t : all_entity_types()) j["rows"].push_back(cell_json(to_string(t), report.row(t), report.averaged));
  j["rows"].push_back(cell_json("All", report.all, report.averaged));
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.corpus = j.at("corpus").get<std::string>();
    r.gold = j.at("gold").get<std::string>();
    r.system = j.at("system").get<std::string>();
    r.averaged = j.at("averaged").get<bool>();
    r.runs = j.at("runs").get<std::size_t>();
    const auto& rows = j.at("rows");
    if (!rows.is_array() || rows.size() != kNumEntityTypes + 1)
      throw FormatError("report must have " + std::to_string(kNumEntityTypes + 1) + " rows");
    for (std::size_t i = 0; i < kNumEntityTypes; ++i) {
      auto type = parse_entity_type(rows[i].at("type").get<std::string>());
      if (index_of(type) != i) throw FormatError("report rows are not in inventory order");
      r.per_type[i] = cell_from_json(rows[i]);
    }
    if (rows[kNumEntityTypes].at("type").get<std::string>() != "All") throw FormatError("last report row must be All");
    r.all = cell_from_json(rows[kNumEntityTypes]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed evaluation report: ") + e.what());
  }
}

}  // namespace radner::eval
