#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "radner/core/document.hpp"

namespace radner {

struct BioLabel {
  enum class Kind : std::uint8_t { O, B, I };

  Kind kind = Kind::O;
  EntityType type = EntityType::ischaemic_stroke;  // ignored when kind == O

  static BioLabel outside() { return {}; }
  static BioLabel begin(EntityType t) { return {Kind::B, t}; }
  static BioLabel inside(EntityType t) { return {Kind::I, t}; }

  bool is_outside() const { return kind == Kind::O; }
  bool operator==(const BioLabel& other) const {
    return kind == other.kind && (kind == Kind::O || type == other.type);
  }
};

std::string to_string(const BioLabel& label);

// Throws FormatError for strings outside the label alphabet.
BioLabel parse_bio_label(std::string_view text);

// A typed span produced by decoding; the sentence index is supplied by the caller.
struct TypedSpan {
  EntityType type;
  Span span;

  auto operator<=>(const TypedSpan&) const = default;
};

// Encodes non-overlapping spans of a sentence with `length` tokens.
// Throws InvalidArgument on overlap or out-of-range spans.
std::vector<BioLabel> bio_encode(std::size_t length, std::span<const TypedSpan> spans);
std::vector<BioLabel> bio_encode(const Sentence& sentence, std::span<const EntityMention> mentions);

// Decodes a label sequence. With repair=false, an I- label that does not continue
// a same-typed mention throws FormatError; with repair=true it opens a new mention.
std::vector<TypedSpan> bio_decode(std::span<const BioLabel> labels, bool repair);
std::vector<TypedSpan> bio_decode(std::span<const std::string> labels, bool repair);

std::vector<EntityMention> to_mentions(std::span<const TypedSpan> spans, std::size_t sentence);

}  // namespace radner
