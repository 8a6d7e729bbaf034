#pragma once

#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "radner/core/document.hpp"
#include "radner/core/phrase_trie.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::ruler {

inline constexpr std::string_view kSource = "ruler";

struct LexiconEntry {
  std::vector<std::string> phrase;  // lowercased tokens
  EntityType type;
};

class Lexicon {
 public:
  // Lines are `phrase<TAB>entity_type`; '#' starts a comment. The phrase is
  // tokenized with the textproc tokenizer and lowercased.
  static Lexicon load(const std::filesystem::path& path);

  // Throws InvalidArgument on an empty phrase or a phrase already mapped to another type.
  void add(LexiconEntry entry);

  const std::vector<LexiconEntry>& entries() const { return entries_; }
  const PhraseTrie<EntityType>& trie() const { return trie_; }

 private:
  std::vector<LexiconEntry> entries_;
  PhraseTrie<EntityType> trie_;
};

// Leftmost-longest dictionary annotation of one sentence (case-insensitive).
std::vector<EntityMention> apply_lexicon(const Sentence& sentence, const Lexicon& lexicon);

struct Atom {
  enum class Kind { literal, regex, lex, pos, any };

  Kind kind = Kind::any;
  std::string text;  // literal (lowercased) or regex source
  std::regex regex;
  EntityType type = EntityType::stroke;
  PosTag pos = PosTag::OTHER;
  bool optional = false;
};

// Half-open range of pattern atom indices.
struct AtomRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct Action {
  enum class Kind { assign, retype, remove };

  Kind kind = Kind::assign;
  EntityType type = EntityType::stroke;
  std::optional<AtomRange> span;  // required for assign; defaults to the whole match for retype
};

struct Rule {
  std::string name;
  int priority = 0;
  std::vector<Atom> pattern;
  Action action;
  std::size_t line = 0;  // source line, kept for diagnostics
};

// Parses the line-oriented rule language:
//   RULE <name> PRIORITY <int>: <atom>... => ASSIGN <type> SPAN i..j | RETYPE <type> [SPAN i..j] | DELETE
// Atoms: "literal", /regex/, LEX(type), POS(tag), ANY, each optionally followed by '?'.
// Rules come back sorted by descending priority, file order breaking ties.
std::vector<Rule> parse_rules(std::string_view source, const std::string& origin = "<rules>");
std::vector<Rule> load_rules(const std::filesystem::path& path);

struct RuleSet {
  Lexicon lexicon;
  std::vector<Rule> rules;

  static RuleSet load(const std::filesystem::path& lexicon_path, const std::filesystem::path& rules_path);
  // Loads lexicon.tsv and rules.dsl from `dir`.
  static RuleSet load_dir(const std::filesystem::path& dir);
  static RuleSet load_stock() { return load_dir(textproc::stock_data_dir() / "ruler"); }
};

struct RuleOutcome {
  std::vector<EntityMention> mentions;
  std::vector<std::string> diagnostics;
};

// Applies rules in order to the lexicon mentions of one sentence. Mentions
// created or consumed by a rule are locked: later rules neither match them
// through LEX atoms nor overwrite them. A rule output that would overlap a
// locked mention is dropped and reported in the diagnostics.
RuleOutcome apply_rules(const Sentence& sentence, std::vector<EntityMention> lexicon_mentions,
                        const std::vector<Rule>& rules);

// Runs the textproc pipeline when `doc` has raw text but no sentences, then
// lexicon + rules per sentence; results are stored under source "ruler".
void annotate_rule_based(Document& doc, const RuleSet& ruleset, const textproc::Pipeline& pipeline,
                         std::vector<std::string>* diagnostics = nullptr);

}  // namespace radner::ruler
