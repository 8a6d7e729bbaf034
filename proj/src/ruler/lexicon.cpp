#include <fstream>

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/ruler/ruler.hpp"

namespace radner::ruler {

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon '" + path.string() + "'");
  Lexicon lexicon;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto content = strip_comment(line);
    if (content.empty()) continue;
    auto where = path.string() + ":" + std::to_string(lineno) + ": ";
    auto fields = split(content, '\t');
    if (fields.size() != 2) throw FormatError(where + "expected phrase<TAB>entity_type");
    LexiconEntry entry;
    for (const auto& tok : textproc::tokenize(fields[0])) entry.phrase.push_back(to_lower(tok.text));
    try {
      entry.type = parse_entity_type(trim(fields[1]));
      lexicon.add(std::move(entry));
    } catch (const Error& e) {
      throw FormatError(where + e.what());
    }
  }
  return lexicon;
}

void Lexicon::add(LexiconEntry entry) {
  if (entry.phrase.empty()) throw InvalidArgument("empty lexicon phrase");
  if (const auto* existing = trie_.find(entry.phrase)) {
    if (*existing != entry.type) throw InvalidArgument("phrase already mapped to " + std::string(to_string(*existing)));
    return;
  }
  trie_.insert(entry.phrase, entry.type);
  entries_.push_back(std::move(entry));
}

std::vector<EntityMention> apply_lexicon(const Sentence& sentence, const Lexicon& lexicon) {
  std::vector<EntityMention> out;
  auto words = lowered_words(sentence);
  for (const auto& m : lexicon.trie().match_longest(words)) out.push_back({*m.value, sentence.index, m.span});
  return out;
}

}  // namespace radner::ruler
