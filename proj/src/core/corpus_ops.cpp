#include "radner/core/corpus_ops.hpp"

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"

namespace radner {

StatsReport corpus_stats(const Corpus& corpus, const std::string& source) {
  StatsReport stats;
  bool seen_source = false;
  for (const auto& doc : corpus.documents) {
    ++stats.reports;
    stats.sentences += doc.sentences.size();
    auto it = doc.annotations.find(source);
    if (it == doc.annotations.end()) continue;
    seen_source = true;
    for (const auto& m : it->second) {
      ++stats.entities;
      ++stats.per_type[index_of(m.type)];
    }
  }
  if (!corpus.documents.empty() && !seen_source)
    throw InvalidArgument("annotation source '" + source + "' not present in corpus '" + corpus.name + "'");
  return stats;
}

bool keyword_matches(std::string_view pattern, std::string_view token) {
  const std::string p = to_lower(pattern);
  const std::string t = to_lower(token);
  if (!p.empty() && p.back() == '*') {
    std::string_view prefix(p.data(), p.size() - 1);
    return std::string_view(t).starts_with(prefix);
  }
  return p == t;
}

Corpus filter_corpus(const Corpus& corpus, std::span<const std::string> patterns) {
  if (patterns.empty()) throw InvalidArgument("keyword list is empty");
  for (const auto& p : patterns)
    if (p.empty() || p == "*") throw InvalidArgument("empty keyword pattern");

  Corpus out;
  out.name = corpus.name;
  for (const auto& doc : corpus.documents) {
    bool hit = false;
    for (const auto& sent : doc.sentences) {
      for (const auto& tok : sent.tokens) {
        for (const auto& p : patterns)
          if (keyword_matches(p, tok.text)) {
            hit = true;
            break;
          }
        if (hit) break;
      }
      if (hit) break;
    }
    if (hit) out.documents.push_back(doc);
  }
  return out;
}

}  // namespace radner
