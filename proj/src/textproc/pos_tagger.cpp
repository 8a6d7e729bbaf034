#include <fstream>

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::textproc {

TagLexicon TagLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open tag lexicon '" + path.string() + "'");
  TagLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (strip_comment(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected word<TAB>tag");
    try {
      lex.add(trim(fields[0]), parse_pos_tag(trim(fields[1])));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lex;
}

void TagLexicon::add(std::string_view word, PosTag tag) { entries_[to_lower(word)] = tag; }

const PosTag* TagLexicon::find(std::string_view lowered) const {
  auto it = entries_.find(std::string(lowered));
  return it == entries_.end() ? nullptr : &it->second;
}

PosTag tag_word(std::string_view word, const TagLexicon& lexicon) {
  const std::string lower = to_lower(word);
  if (const auto* tag = lexicon.find(lower)) return *tag;

  bool punct = !word.empty();
  for (char c : word) punct = punct && is_punct(c);
  if (punct) return PosTag::PUNC;
  if (!word.empty() && word.front() >= '0' && word.front() <= '9') return PosTag::NUM;
  if (lower.size() > 3 && lower.ends_with("ly")) return PosTag::ADV;
  if (lower.size() > 3 && (lower.ends_with("ic") || lower.ends_with("al"))) return PosTag::ADJ;
  return PosTag::N;
}

Sentence pos_tag(Sentence sentence, const TagLexicon& lexicon) {
  for (auto& tok : sentence.tokens) tok.pos = tag_word(tok.text, lexicon);
  return sentence;
}

}  // namespace radner::textproc
