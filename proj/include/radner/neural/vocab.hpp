#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "radner/core/bio.hpp"
#include "radner/core/document.hpp"

namespace radner::neural {

// String-to-index map with reserved PAD = 0 and UNK = 1.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocab();
  // Rebuilds a vocabulary from its item list; items[0..1] must be the reserved entries.
  static Vocab from_items(std::vector<std::string> items);

  std::size_t add(const std::string& item);
  std::size_t lookup(const std::string& item) const;
  bool contains(const std::string& item) const { return index_.contains(item); }
  std::size_t size() const { return items_.size(); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Label alphabet of one model: index 0 is O, then B-t, I-t per type in order.
// START and STOP are the two extra states of the transition matrix.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<EntityType> types);

  std::size_t size() const { return labels_.size(); }
  std::size_t start() const { return labels_.size(); }
  std::size_t stop() const { return labels_.size() + 1; }
  const std::vector<EntityType>& types() const { return types_; }
  const BioLabel& label(std::size_t i) const { return labels_.at(i); }
  // Labels of types outside the set map to O.
  std::size_t index(const BioLabel& label) const;
  std::vector<std::string> names() const;

  // (L+2)x(L+2) legality of transitions from row to column: forbids
  // START->I-x, O->I-x and B-x/I-x -> I-y for x != y.
  std::vector<std::vector<bool>> transition_mask() const;

 private:
  std::vector<EntityType> types_;
  std::vector<BioLabel> labels_;
};

struct VocabMaps {
  Vocab words;  // lowercased word forms
  Vocab chars;  // UTF-8 code points
  LabelSet labels;
};

// Splits a token into UTF-8 code points.
std::vector<std::string> utf8_chars(std::string_view text);

// Collects every word and character of `corpus` in first-occurrence order.
// Throws InvalidArgument for an empty corpus.
VocabMaps build_vocab(const Corpus& corpus, std::vector<EntityType> types);

struct TokenFeatures {
  std::size_t word = Vocab::kUnk;
  std::vector<std::size_t> chars;

  bool operator==(const TokenFeatures&) const = default;
};

std::vector<TokenFeatures> encode_inputs(const Sentence& sentence, const VocabMaps& vocab);

// Gold label indices of `sentence` under `labels`, from mentions of `source`.
std::vector<std::size_t> gold_labels(const Document& doc, const Sentence& sentence, const std::string& source,
                                     const LabelSet& labels);

}  // namespace radner::neural
