#include "radner/neural/vocab.hpp"

#include <algorithm>

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"

namespace radner::neural {

Vocab::Vocab() {
  add("<pad>");
  add("<unk>");
}

Vocab Vocab::from_items(std::vector<std::string> items) {
  if (items.size() < 2 || items[0] != "<pad>" || items[1] != "<unk>")
    throw ModelError("vocabulary must start with the reserved <pad> and <unk> entries");
  Vocab v;
  for (std::size_t i = 2; i < items.size(); ++i)
    if (v.add(items[i]) != i) throw ModelError("duplicate vocabulary entry '" + items[i] + "'");
  return v;
}

std::size_t Vocab::add(const std::string& item) {
  auto [it, inserted] = index_.emplace(item, items_.size());
  if (inserted) items_.push_back(item);
  return it->second;
}

std::size_t Vocab::lookup(const std::string& item) const {
  auto it = index_.find(item);
  return it == index_.end() ? kUnk : it->second;
}

LabelSet::LabelSet(std::vector<EntityType> types) : types_(std::move(types)) {
  labels_.push_back(BioLabel::outside());
  for (auto t : types_) {
    labels_.push_back(BioLabel::begin(t));
    labels_.push_back(BioLabel::inside(t));
  }
}

std::size_t LabelSet::index(const BioLabel& label) const {
  if (label.is_outside()) return 0;
  for (std::size_t i = 0; i < types_.size(); ++i)
    if (types_[i] == label.type) return 1 + 2 * i + (label.kind == BioLabel::Kind::I ? 1 : 0);
  return 0;
}

std::vector<std::string> LabelSet::names() const {
  std::vector<std::string> out;
  for (const auto& l : labels_) out.push_back(to_string(l));
  return out;
}

std::vector<std::vector<bool>> LabelSet::transition_mask() const {
  const std::size_t n = size() + 2;
  std::vector<std::vector<bool>> mask(n, std::vector<bool>(n, true));
  for (std::size_t to = 0; to < size(); ++to) {
    const auto& target = labels_[to];
    if (target.kind != BioLabel::Kind::I) continue;
    mask[start()][to] = false;
    for (std::size_t from = 0; from < size(); ++from) {
      const auto& source = labels_[from];
      if (source.is_outside() || source.type != target.type) mask[from][to] = false;
    }
  }
  // Nothing enters START and nothing leaves STOP.
  for (std::size_t i = 0; i < n; ++i) {
    mask[i][start()] = false;
    mask[stop()][i] = false;
  }
  mask[start()][stop()] = false;
  return mask;
}

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 1;
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

VocabMaps build_vocab(const Corpus& corpus, std::vector<EntityType> types) {
  VocabMaps maps;
  maps.labels = LabelSet(std::move(types));
  bool any_token = false;
  for (const auto& doc : corpus.documents)
    for (const auto& sent : doc.sentences)
      for (const auto& tok : sent.tokens) {
        any_token = true;
        maps.words.add(to_lower(tok.text));
        for (const auto& ch : utf8_chars(tok.text)) maps.chars.add(ch);
      }
  if (!any_token) throw InvalidArgument("cannot build a vocabulary from an empty corpus");
  return maps;
}

std::vector<TokenFeatures> encode_inputs(const Sentence& sentence, const VocabMaps& vocab) {
  std::vector<TokenFeatures> out;
  out.reserve(sentence.size());
  for (const auto& tok : sentence.tokens) {
    TokenFeatures f;
    f.word = vocab.words.lookup(to_lower(tok.text));
    for (const auto& ch : utf8_chars(tok.text)) f.chars.push_back(vocab.chars.lookup(ch));
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<std::size_t> gold_labels(const Document& doc, const Sentence& sentence, const std::string& source,
                                     const LabelSet& labels) {
  std::vector<EntityMention> kept;
  for (const auto& m : doc.mentions_in(source, sentence.index)) {
    const auto& types = labels.types();
    if (std::find(types.begin(), types.end(), m.type) != types.end()) kept.push_back(m);
  }
  std::vector<std::size_t> out;
  for (const auto& l : bio_encode(sentence, kept)) out.push_back(labels.index(l));
  return out;
}

}  // namespace radner::neural
