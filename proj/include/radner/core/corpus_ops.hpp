#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "radner/core/document.hpp"

namespace radner {

struct StatsReport {
  std::size_t reports = 0;
  std::size_t sentences = 0;
  std::size_t entities = 0;
  std::array<std::size_t, kNumEntityTypes> per_type{};

  bool operator==(const StatsReport&) const = default;
};

// Counts documents, sentences and mentions of `source`. Throws InvalidArgument
// when the corpus is non-empty and no document carries `source`.
StatsReport corpus_stats(const Corpus& corpus, const std::string& source = "gold");

// Keeps the documents containing at least one token matching a keyword.
// Matching is ASCII case-insensitive; a trailing '*' makes a pattern a prefix match.
Corpus filter_corpus(const Corpus& corpus, std::span<const std::string> patterns);

bool keyword_matches(std::string_view pattern, std::string_view token);

}  // namespace radner
