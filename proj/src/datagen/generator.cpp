#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <span>
#include <unordered_map>

#include <fmt/format.h>

#include "radner/core/error.hpp"
#include "radner/core/random.hpp"
#include "radner/datagen/datagen.hpp"

namespace radner::datagen {
namespace {

using json = nlohmann::json;

struct SlotSpan {
  std::size_t start;
  std::size_t end;
  EntityType type;
};

struct DraftSentence {
  std::string text;
  std::vector<SlotSpan> slots;
};

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[rng.below(items.size())];
}

DraftSentence fill(const ParsedTemplate& tpl, const GenConfig& config, Rng& rng) {
  DraftSentence out;
  for (std::size_t i = 0; i < tpl.slots.size(); ++i) {
    out.text += tpl.literals[i];
    std::string filler = pick(config.fillers.at(tpl.slots[i].key), rng);
    if (out.text.empty() && !filler.empty())
      filler[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(filler[0])));
    out.slots.push_back({out.text.size(), out.text.size() + filler.size(), tpl.slots[i].type});
    out.text += filler;
  }
  out.text += tpl.literals.back();
  return out;
}

}  // namespace

std::map<EntityType, std::size_t> default_targets(std::size_t reports) {
  std::map<EntityType, std::size_t> out;
  for (auto t : all_entity_types()) {
    const double scaled = static_cast<double>(kReferenceCounts[index_of(t)]) * static_cast<double>(reports) /
                          static_cast<double>(kReferenceReports);
    if (auto n = static_cast<std::size_t>(std::llround(scaled)); n > 0) out[t] = n;
  }
  return out;
}

std::map<EntityType, std::size_t> GenConfig::effective_targets() const {
  return targets.empty() ? default_targets(reports) : targets;
}

ParsedTemplate parse_template(const std::string& text) {
  ParsedTemplate out;
  std::string literal;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '}') throw InvalidArgument("unmatched '}' in template \"" + text + "\"");
    if (text[i] != '{') {
      literal += text[i++];
      continue;
    }
    auto close = text.find('}', i);
    if (close == std::string::npos) throw InvalidArgument("unterminated slot in template \"" + text + "\"");
    std::string key = text.substr(i + 1, close - i - 1);
    auto type_name = key.substr(0, key.find(':'));
    auto type = try_parse_entity_type(type_name);
    if (!type) throw InvalidArgument("unknown slot type '" + type_name + "' in template \"" + text + "\"");
    if (key.find(':') != std::string::npos && key.size() == type_name.size() + 1)
      throw InvalidArgument("empty pool name in template \"" + text + "\"");
    out.literals.push_back(std::move(literal));
    literal.clear();
    out.slots.push_back({key, *type});
    i = close + 1;
  }
  out.literals.push_back(std::move(literal));
  return out;
}

void GenConfig::validate() const {
  if (reports == 0) throw InvalidArgument("reports must be positive");
  if (templates.empty()) throw InvalidArgument("no templates configured");
  if (headers.empty()) throw InvalidArgument("no section headers configured");
  if (min_distractors > max_distractors) throw InvalidArgument("min_distractors exceeds max_distractors");
  if (max_distractors > 0 && distractors.empty()) throw InvalidArgument("distractors requested but none configured");
  for (const auto& [key, pool] : fillers)
    for (const auto& f : pool)
      if (f.empty() || f.find_first_of("{}\n") != std::string::npos)
        throw InvalidArgument("bad filler \"" + f + "\" for slot '" + key + "'");
  std::map<EntityType, bool> covered;
  for (const auto& t : templates) {
    const auto parsed = parse_template(t);
    if (t.find('\n') != std::string::npos) throw InvalidArgument("template spans several lines: \"" + t + "\"");
    for (const auto& slot : parsed.slots) {
      auto it = fillers.find(slot.key);
      if (it == fillers.end() || it->second.empty())
        throw InvalidArgument("slot '" + slot.key + "' has no fillers");
      covered[slot.type] = true;
    }
  }
  for (const auto& [type, count] : effective_targets())
    if (count > 0 && !covered[type])
      throw InvalidArgument("no template places mentions of '" + std::string(to_string(type)) + "'");
}

GenConfig gen_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("generator config must be a JSON object");
  GenConfig c;
  auto strings = [](const json& v, const std::string& key) {
    if (!v.is_array()) throw InvalidArgument("config '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) throw InvalidArgument("config '" + key + "' must be an array of strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  };
  auto count = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw InvalidArgument("config '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "seed") c.seed = count(v, key);
    else if (key == "reports") c.reports = count(v, key);
    else if (key == "targets") {
      if (!v.is_object()) throw InvalidArgument("config 'targets' must be an object");
      for (const auto& [name, n] : v.items()) {
        auto t = try_parse_entity_type(name);
        if (!t) throw InvalidArgument("unknown entity type '" + name + "' in targets");
        c.targets[*t] = count(n, "targets." + name);
      }
    } else if (key == "templates") c.templates = strings(v, key);
    else if (key == "fillers") {
      if (!v.is_object()) throw InvalidArgument("config 'fillers' must be an object");
      for (const auto& [slot, pool] : v.items()) c.fillers[slot] = strings(pool, "fillers." + slot);
    } else if (key == "distractors") c.distractors = strings(v, key);
    else if (key == "headers") c.headers = strings(v, key);
    else if (key == "preambles") c.preambles = strings(v, key);
    else if (key == "min_distractors") c.min_distractors = count(v, key);
    else if (key == "max_distractors") c.max_distractors = count(v, key);
    else if (key == "corpus_name") {
      if (!v.is_string()) throw InvalidArgument("config 'corpus_name' must be a string");
      c.corpus_name = v.get<std::string>();
    } else throw InvalidArgument("unknown generator config key '" + key + "'");
  }
  return c;
}

GenConfig load_gen_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generator config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return gen_config_from_json(j);
}

GenConfig load_stock_gen_config() { return load_gen_config(textproc::stock_data_dir() / "datagen" / "default.json"); }

Corpus generate_corpus(const GenConfig& config, const textproc::Pipeline& pipeline) {
  config.validate();
  Rng rng(config.seed);

  std::vector<ParsedTemplate> templates;
  std::vector<std::map<EntityType, std::size_t>> demands;
  for (const auto& t : config.templates) {
    templates.push_back(parse_template(t));
    std::map<EntityType, std::size_t> need;
    for (const auto& s : templates.back().slots) ++need[s.type];
    demands.push_back(std::move(need));
  }

  auto remaining = config.effective_targets();
  std::size_t total = 0;
  for (const auto& [t, n] : remaining) total += n;

  std::vector<DraftSentence> drafts;
  while (total > 0) {
    // Choose the type to place in proportion to what is left, then a template
    // that contains it and fits the remaining counts.
    std::size_t r = rng.below(total);
    EntityType focus{};
    for (const auto& [t, n] : remaining) {
      if (r < n) {
        focus = t;
        break;
      }
      r -= n;
    }
    std::vector<std::size_t> fitting;
    for (std::size_t i = 0; i < templates.size(); ++i) {
      const auto& need = demands[i];
      if (!need.contains(focus)) continue;
      bool fits = std::all_of(need.begin(), need.end(), [&](const auto& kv) {
        auto it = remaining.find(kv.first);
        return it != remaining.end() && it->second >= kv.second;
      });
      if (fits) fitting.push_back(i);
    }
    if (fitting.empty())
      throw InvalidArgument(fmt::format("no template can place the remaining {} '{}' mention(s)", remaining[focus],
                                        to_string(focus)));
    const auto chosen = pick(fitting, rng);
    for (const auto& [t, n] : demands[chosen]) {
      remaining[t] -= n;
      total -= n;
    }
    drafts.push_back(fill(templates[chosen], config, rng));
  }

  std::vector<std::vector<DraftSentence>> per_report(config.reports);
  for (auto& d : drafts) per_report[rng.below(config.reports)].push_back(std::move(d));

  Corpus corpus;
  corpus.name = config.corpus_name;
  const int width = std::max<int>(4, static_cast<int>(std::to_string(config.reports).size()));
  for (std::size_t r = 0; r < config.reports; ++r) {
    auto& sentences = per_report[r];
    const std::size_t extra =
        config.min_distractors + rng.below(config.max_distractors - config.min_distractors + 1);
    for (std::size_t i = 0; i < extra; ++i) sentences.push_back({pick(config.distractors, rng), {}});
    rng.shuffle(sentences);

    std::string text;
    std::vector<SlotSpan> gold;
    auto append_block = [&](std::span<const DraftSentence> block) {
      for (std::size_t i = 0; i < block.size(); ++i) {
        if (i > 0) text += ' ';
        for (const auto& s : block[i].slots) gold.push_back({text.size() + s.start, text.size() + s.end, s.type});
        text += block[i].text;
      }
      text += '\n';
    };
    if (!config.preambles.empty()) text += "Clinical details: " + pick(config.preambles, rng) + "\n\n";
    text += pick(config.headers, rng) + ":\n";
    const std::size_t comment = sentences.size() >= 3 ? 1 : 0;
    append_block(std::span(sentences).first(sentences.size() - comment));
    if (comment) {
      text += "\nComment:\n";
      append_block(std::span(sentences).last(1));
    }

    Document doc = pipeline.process(fmt::format("report-{:0{}}", r + 1, width), std::move(text));
    std::unordered_map<std::size_t, std::pair<std::size_t, std::size_t>> by_start, by_end;
    for (const auto& sent : doc.sentences)
      for (std::size_t k = 0; k < sent.tokens.size(); ++k) {
        by_start[sent.tokens[k].start] = {sent.index, k};
        by_end[sent.tokens[k].end] = {sent.index, k + 1};
      }
    std::vector<EntityMention> mentions;
    for (const auto& g : gold) {
      auto s = by_start.find(g.start);
      auto e = by_end.find(g.end);
      const auto slot_text = doc.raw_text.substr(g.start, g.end - g.start);
      if (s == by_start.end() || e == by_end.end())
        throw InvalidArgument("filler \"" + slot_text + "\" does not align with token boundaries");
      if (s->second.first != e->second.first)
        throw InvalidArgument("filler \"" + slot_text + "\" crosses a sentence boundary");
      mentions.push_back({g.type, s->second.first, {s->second.second, e->second.second}});
    }
    set_annotations(doc, kGoldSource, std::move(mentions));
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double dev_fraction, std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) throw InvalidArgument("dev fraction must lie strictly between 0 and 1");
  const std::size_t n = corpus.documents.size();
  if (n < 2) throw InvalidArgument("cannot split a corpus of fewer than 2 documents");
  auto k = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<bool> in_dev(n, false);
  for (std::size_t i = 0; i < k; ++i) in_dev[order[i]] = true;

  Corpus dev{corpus.name + ".dev", {}}, test{corpus.name + ".test", {}};
  for (std::size_t i = 0; i < n; ++i) (in_dev[i] ? dev : test).documents.push_back(corpus.documents[i]);
  return {std::move(dev), std::move(test)};
}

}  // namespace radner::datagen
