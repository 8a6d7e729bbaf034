#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "radner/core/document.hpp"

namespace radner::textproc {

// Directory holding the stock resources (lexicons, rules, configs). Honors the
// RADNER_DATA_DIR environment variable, else the path configured at build time.
std::filesystem::path stock_data_dir();

// ---- sectioning -------------------------------------------------------------

inline constexpr std::string_view kPreambleLabel = "preamble";

// Splits a report into sections. A line consisting only of `<Title>:` (title of
// at most six words, starting with an uppercase letter) opens a section that
// runs up to the next header; text before the first header is "preamble".
// The returned ranges partition the text.
std::vector<Section> section_report(std::string_view text);

// First byte of a section's content, i.e. just past its header line.
std::size_t section_body_start(std::string_view text, const Section& section);

// ---- tokenization -----------------------------------------------------------

bool is_punct(char c);

// Whitespace split, then leading/trailing ASCII punctuation peeled off one
// character per token. Internal hyphens, periods and alphanumerics stay together.
// Offsets are relative to `text` plus `base_offset`. POS is left as OTHER.
std::vector<Token> tokenize(std::string_view text, std::size_t base_offset = 0);

// ---- sentence splitting -----------------------------------------------------

class AbbreviationList {
 public:
  AbbreviationList() = default;
  // Entries must end with '.'; they are stored lowercased.
  explicit AbbreviationList(std::span<const std::string> entries);

  static AbbreviationList load(const std::filesystem::path& path);

  bool contains(std::string_view lowered) const { return entries_.contains(std::string(lowered)); }
  std::size_t size() const { return entries_.size(); }

 private:
  std::set<std::string> entries_;
};

// Groups tokens (offsets into `text`) into sentences. Breaks after ".", "!" and
// "?" unless the period closes a listed abbreviation, and at line breaks that
// separate list items or paragraphs.
std::vector<Sentence> split_sentences(std::string_view text, std::span<const Token> tokens,
                                      const AbbreviationList& abbrevs);

// ---- POS tagging ------------------------------------------------------------

class TagLexicon {
 public:
  TagLexicon() = default;
  static TagLexicon load(const std::filesystem::path& path);

  void add(std::string_view word, PosTag tag);
  const PosTag* find(std::string_view lowered) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, PosTag> entries_;
};

// Lexicon lookup, then: punctuation -> PUNC, leading digit -> NUM, -ly -> ADV,
// -ic/-al -> ADJ, otherwise N.
PosTag tag_word(std::string_view word, const TagLexicon& lexicon);
Sentence pos_tag(Sentence sentence, const TagLexicon& lexicon);

// ---- full pipeline ----------------------------------------------------------

class Pipeline {
 public:
  Pipeline(AbbreviationList abbrevs, TagLexicon lexicon) : abbrevs_(std::move(abbrevs)), lexicon_(std::move(lexicon)) {}

  // Loads abbreviations.txt and pos_lexicon.tsv from `dir`.
  static Pipeline load(const std::filesystem::path& dir);
  static Pipeline load_stock() { return load(stock_data_dir() / "textproc"); }

  // Sectioning, tokenization, sentence splitting and POS tagging of raw text.
  // Section header lines are not tokenized.
  Document process(std::string id, std::string raw_text) const;

  // Fills sections/sentences of a document that only carries raw text.
  void process(Document& doc) const;

  const AbbreviationList& abbreviations() const { return abbrevs_; }
  const TagLexicon& lexicon() const { return lexicon_; }

 private:
  AbbreviationList abbrevs_;
  TagLexicon lexicon_;
};

}  // namespace radner::textproc
