#include <cstdlib>

#include "radner/textproc/textproc.hpp"

namespace radner::textproc {

std::filesystem::path stock_data_dir() {
  if (const char* env = std::getenv("RADNER_DATA_DIR"); env && *env) return env;
  return RADNER_DATA_DIR;
}

Pipeline Pipeline::load(const std::filesystem::path& dir) {
  return Pipeline(AbbreviationList::load(dir / "abbreviations.txt"), TagLexicon::load(dir / "pos_lexicon.tsv"));
}

Document Pipeline::process(std::string id, std::string raw_text) const {
  Document doc;
  doc.id = std::move(id);
  doc.raw_text = std::move(raw_text);
  process(doc);
  return doc;
}

void Pipeline::process(Document& doc) const {
  const std::string_view text = doc.raw_text;
  doc.sections = section_report(text);
  doc.sentences.clear();
  for (const auto& section : doc.sections) {
    std::size_t body = section_body_start(text, section);
    auto tokens = tokenize(text.substr(body, section.end - body), body);
    for (auto& sent : split_sentences(text, tokens, abbrevs_)) {
      sent.index = doc.sentences.size();
      doc.sentences.push_back(pos_tag(std::move(sent), lexicon_));
    }
  }
}

}  // namespace radner::textproc
