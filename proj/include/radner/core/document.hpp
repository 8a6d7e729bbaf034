#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radner/core/entity_type.hpp"

namespace radner {

// Simplified part-of-speech tagset shared by the corpus formats and textproc.
enum class PosTag : std::uint8_t { N, V, ADJ, ADV, PREP, DET, CONJ, NUM, PUNC, OTHER };

std::string_view to_string(PosTag tag);
PosTag parse_pos_tag(std::string_view name);

struct Token {
  std::string text;
  std::size_t start = 0;  // byte offsets into Document::raw_text, half-open
  std::size_t end = 0;
  PosTag pos = PosTag::OTHER;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::size_t index = 0;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

// A half-open token span inside a single sentence.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool overlaps(const Span& other) const { return start < other.end && other.start < end; }
  auto operator<=>(const Span&) const = default;
};

struct EntityMention {
  EntityType type = EntityType::stroke;
  std::size_t sentence = 0;
  Span span;

  auto operator<=>(const EntityMention&) const = default;
};

struct Section {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Section&) const = default;
};

// Mentions are stored per annotation source ("gold", "ruler", an annotator id, ...).
using Annotations = std::map<std::string, std::vector<EntityMention>>;

struct Document {
  std::string id;
  std::string raw_text;
  std::vector<Section> sections;
  std::vector<Sentence> sentences;
  Annotations annotations;

  bool has_source(const std::string& source) const { return annotations.contains(source); }

  // Mentions of `source` lying in sentence `index`, in token order.
  std::vector<EntityMention> mentions_in(const std::string& source, std::size_t index) const;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Document> documents;

  bool operator==(const Corpus&) const = default;
};

// Sorts mentions by (sentence, start, end, type).
void sort_mentions(std::vector<EntityMention>& mentions);

// Replaces the mentions of `source`, keeping them sorted. Throws InvalidArgument
// when mentions overlap or fall outside their sentence.
void set_annotations(Document& doc, const std::string& source, std::vector<EntityMention> mentions);

// Checks every document/corpus invariant; throws FormatError describing the first violation.
void validate(const Document& doc);
void validate(const Corpus& corpus);

}  // namespace radner
