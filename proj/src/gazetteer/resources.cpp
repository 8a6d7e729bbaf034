#include <algorithm>
#include <fstream>
#include <set>

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/gazetteer/gazetteer.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::gazetteer {
namespace {

template <typename Fn>
void read_tsv(const std::filesystem::path& path, const char* what, Fn&& on_line) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + std::string(what) + " '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto content = strip_comment(line);
    if (content.empty()) continue;
    auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    auto fields = split(content, '\t');
    if (fields.size() != 2) throw FormatError(where + "expected two tab-separated fields");
    std::vector<std::string> items;
    for (const auto& item : split(fields[1], ',')) items.emplace_back(trim(item));
    try {
      on_line(std::string(trim(fields[0])), items);
    } catch (const InvalidArgument& e) {
      throw FormatError(where + e.what());
    }
  }
}

}  // namespace

ConceptDictionary ConceptDictionary::load(const std::filesystem::path& path) {
  ConceptDictionary dict;
  read_tsv(path, "concept dictionary", [&](const std::string& phrase, const std::vector<std::string>& ids) {
    std::vector<std::string> words;
    for (const auto& tok : textproc::tokenize(phrase)) words.push_back(to_lower(tok.text));
    dict.add(words, ids);
  });
  return dict;
}

void ConceptDictionary::add(const std::vector<std::string>& phrase, const std::vector<std::string>& ids) {
  if (phrase.empty()) throw InvalidArgument("empty dictionary phrase");
  if (ids.empty()) throw InvalidArgument("dictionary phrase without concept ids");
  for (const auto& id : ids)
    if (id.empty()) throw InvalidArgument("empty concept id");
  std::vector<std::string> merged = ids;
  if (auto* existing = trie_.find(phrase)) merged.insert(merged.end(), existing->begin(), existing->end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  if (auto* existing = trie_.find(phrase)) {
    *existing = std::move(merged);
  } else {
    trie_.insert(phrase, std::move(merged));
    phrases_.push_back(phrase);
  }
}

std::vector<std::string> ConceptDictionary::concept_ids() const {
  std::set<std::string> ids;
  for (const auto& p : phrases_) {
    const auto* found = trie_.find(p);
    ids.insert(found->begin(), found->end());
  }
  return {ids.begin(), ids.end()};
}

ConceptMap ConceptMap::load(const std::filesystem::path& path) {
  ConceptMap map;
  read_tsv(path, "concept map", [&](const std::string& id, const std::vector<std::string>& names) {
    std::vector<EntityType> types;
    for (const auto& n : names) {
      auto t = try_parse_entity_type(n);
      if (!t) throw InvalidArgument("unknown entity type '" + n + "'");
      types.push_back(*t);
    }
    map.add(id, std::move(types));
  });
  return map;
}

void ConceptMap::add(const std::string& id, std::vector<EntityType> types) {
  if (id.empty()) throw InvalidArgument("empty concept id");
  if (types.empty()) throw InvalidArgument("concept '" + id + "' has no entity types");
  std::set<EntityType> distinct(types.begin(), types.end());
  if (distinct.size() != types.size()) throw InvalidArgument("concept '" + id + "' lists a type twice");
  if (!map_.emplace(id, std::move(types)).second) throw InvalidArgument("duplicate concept id '" + id + "'");
}

const std::vector<EntityType>& ConceptMap::types(const std::string& id) const {
  auto it = map_.find(id);
  if (it == map_.end()) throw InvalidArgument("concept '" + id + "' is not in the concept map");
  return it->second;
}

ConceptResources ConceptResources::load(const std::filesystem::path& dictionary_path,
                                        const std::filesystem::path& map_path) {
  ConceptResources r{ConceptDictionary::load(dictionary_path), ConceptMap::load(map_path)};
  for (const auto& id : r.dictionary.concept_ids())
    if (!r.map.contains(id))
      throw FormatError(dictionary_path.string() + ": concept '" + id + "' is missing from " + map_path.string());
  return r;
}

ConceptResources ConceptResources::load_dir(const std::filesystem::path& dir) {
  return load(dir / "dictionary.tsv", dir / "concept_map.tsv");
}

ConceptResources ConceptResources::load_stock() { return load_dir(textproc::stock_data_dir() / "gazetteer"); }

std::vector<ConceptMatch> match_concepts(const Sentence& sentence, const ConceptDictionary& dictionary) {
  std::vector<ConceptMatch> out;
  auto words = lowered_words(sentence);
  for (const auto& m : dictionary.trie().match_longest(words)) out.push_back({m.span, *m.value});
  return out;
}

std::vector<std::string> context_words(const Sentence& sentence, Span span, std::size_t window) {
  std::set<std::string> words;
  const std::size_t lo = span.start > window ? span.start - window : 0;
  const std::size_t hi = std::min(sentence.tokens.size(), span.end + window);
  for (std::size_t i = lo; i < hi; ++i)
    if (i < span.start || i >= span.end) words.insert(to_lower(sentence.tokens[i].text));
  return {words.begin(), words.end()};
}

}  // namespace radner::gazetteer
