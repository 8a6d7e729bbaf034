#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "radner/core/document.hpp"

namespace radner {

// Token-level trie over lowercased phrases with leftmost-longest matching.
template <typename Value>
class PhraseTrie {
 public:
  struct Match {
    Span span;
    const Value* value;
  };

  // Inserts `phrase` (already lowercased). Returns false if the phrase already had a value.
  bool insert(const std::vector<std::string>& phrase, Value value) {
    std::size_t node = 0;
    for (const auto& word : phrase) {
      auto it = nodes_[node].children.find(word);
      if (it == nodes_[node].children.end()) {
        nodes_.push_back({});
        it = nodes_[node].children.emplace(word, nodes_.size() - 1).first;
      }
      node = it->second;
    }
    if (nodes_[node].value) return false;
    nodes_[node].value = std::move(value);
    ++size_;
    return true;
  }

  Value* find(const std::vector<std::string>& phrase) {
    std::size_t node = 0;
    for (const auto& word : phrase) {
      auto it = nodes_[node].children.find(word);
      if (it == nodes_[node].children.end()) return nullptr;
      node = it->second;
    }
    return nodes_[node].value ? &*nodes_[node].value : nullptr;
  }

  const Value* find(const std::vector<std::string>& phrase) const {
    return const_cast<PhraseTrie*>(this)->find(phrase);
  }

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  // Scans left to right; at each position the longest phrase wins and scanning
  // resumes after it. `words` must already be lowercased.
  std::vector<Match> match_longest(std::span<const std::string> words) const {
    std::vector<Match> matches;
    std::size_t pos = 0;
    while (pos < words.size()) {
      std::size_t node = 0;
      std::size_t best_end = 0;
      const Value* best = nullptr;
      for (std::size_t i = pos; i < words.size(); ++i) {
        auto it = nodes_[node].children.find(words[i]);
        if (it == nodes_[node].children.end()) break;
        node = it->second;
        if (nodes_[node].value) {
          best_end = i + 1;
          best = &*nodes_[node].value;
        }
      }
      if (best) {
        matches.push_back({{pos, best_end}, best});
        pos = best_end;
      } else {
        ++pos;
      }
    }
    return matches;
  }

 private:
  struct Node {
    std::map<std::string, std::size_t, std::less<>> children;
    std::optional<Value> value;
  };
  std::vector<Node> nodes_ = std::vector<Node>(1);
  std::size_t size_ = 0;
};

// Lowercased token texts of a sentence.
inline std::vector<std::string> lowered_words(const Sentence& sentence) {
  std::vector<std::string> words;
  words.reserve(sentence.tokens.size());
  for (const auto& tok : sentence.tokens) {
    std::string w = tok.text;
    for (char& c : w)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace radner
