#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "radner/core/document.hpp"
#include "radner/core/random.hpp"

namespace radner::test {

// Space-joined tokens, newline between sentences, one preamble section:
// the same layout the CoNLL reader rebuilds.
inline Document make_document(std::string id, const std::vector<std::vector<std::string>>& sentences) {
  Document doc;
  doc.id = std::move(id);
  for (const auto& words : sentences) {
    if (!doc.raw_text.empty()) doc.raw_text += '\n';
    Sentence sent;
    sent.index = doc.sentences.size();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i > 0) doc.raw_text += ' ';
      Token tok{words[i], doc.raw_text.size(), 0, PosTag::N};
      doc.raw_text += words[i];
      tok.end = doc.raw_text.size();
      sent.tokens.push_back(std::move(tok));
    }
    doc.sentences.push_back(std::move(sent));
  }
  if (!doc.raw_text.empty()) doc.sections.push_back({"preamble", 0, doc.raw_text.size()});
  return doc;
}

inline Sentence make_sentence(const std::vector<std::string>& words) {
  return make_document("s", {words}).sentences.front();
}

inline std::vector<std::string> words_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline EntityType random_type(Rng& rng) { return all_entity_types()[rng.below(kNumEntityTypes)]; }

// Random non-overlapping mentions over every sentence of `doc`.
inline std::vector<EntityMention> random_mentions(const Document& doc, Rng& rng, double density = 0.3) {
  std::vector<EntityMention> out;
  for (const auto& sent : doc.sentences) {
    std::size_t pos = 0;
    while (pos < sent.size()) {
      if (rng.uniform() < density) {
        std::size_t len = 1 + rng.below(std::min<std::size_t>(3, sent.size() - pos));
        out.push_back({random_type(rng), sent.index, {pos, pos + len}});
        pos += len;
      } else {
        ++pos;
      }
    }
  }
  return out;
}

inline Document random_document(std::string id, Rng& rng, std::size_t max_sentences = 4, std::size_t max_len = 8) {
  static const std::vector<std::string> vocab = {"infarct", "in",     "the",   "left",  "frontal", "lobe",
                                                 "old",     "acute",  "small", "mass",  "no",      "basal",
                                                 "ganglia", "atrophy", ".",    "stroke", "bleed",  "seen"};
  std::vector<std::vector<std::string>> sentences(1 + rng.below(max_sentences));
  for (auto& s : sentences) {
    const std::size_t n = 1 + rng.below(max_len);
    for (std::size_t i = 0; i < n; ++i) s.push_back(vocab[rng.below(vocab.size())]);
  }
  return make_document(std::move(id), sentences);
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-scale, scale);
  return m;
}

}  // namespace radner::test
