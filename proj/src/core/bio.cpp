#include "radner/core/bio.hpp"

#include <algorithm>

#include "radner/core/error.hpp"

namespace radner {

std::string to_string(const BioLabel& label) {
  switch (label.kind) {
    case BioLabel::Kind::O:
      return "O";
    case BioLabel::Kind::B:
      return "B-" + std::string(to_string(label.type));
    case BioLabel::Kind::I:
      return "I-" + std::string(to_string(label.type));
  }
  return "O";
}

BioLabel parse_bio_label(std::string_view text) {
  if (text == "O") return BioLabel::outside();
  if (text.size() > 2 && text[1] == '-' && (text[0] == 'B' || text[0] == 'I')) {
    if (auto type = try_parse_entity_type(text.substr(2)))
      return text[0] == 'B' ? BioLabel::begin(*type) : BioLabel::inside(*type);
  }
  throw FormatError("unknown BIO label '" + std::string(text) + "'");
}

std::vector<BioLabel> bio_encode(std::size_t length, std::span<const TypedSpan> spans) {
  std::vector<BioLabel> labels(length);
  std::vector<bool> used(length, false);
  for (const auto& s : spans) {
    if (s.span.start >= s.span.end || s.span.end > length)
      throw InvalidArgument("span [" + std::to_string(s.span.start) + "," + std::to_string(s.span.end) +
                            ") out of range for sentence of length " + std::to_string(length));
    for (std::size_t i = s.span.start; i < s.span.end; ++i) {
      if (used[i]) throw InvalidArgument("overlapping mentions at token " + std::to_string(i));
      used[i] = true;
      labels[i] = i == s.span.start ? BioLabel::begin(s.type) : BioLabel::inside(s.type);
    }
  }
  return labels;
}

std::vector<BioLabel> bio_encode(const Sentence& sentence, std::span<const EntityMention> mentions) {
  std::vector<TypedSpan> spans;
  spans.reserve(mentions.size());
  for (const auto& m : mentions) {
    if (m.sentence != sentence.index)
      throw InvalidArgument("mention belongs to sentence " + std::to_string(m.sentence) + ", not " +
                            std::to_string(sentence.index));
    spans.push_back({m.type, m.span});
  }
  return bio_encode(sentence.size(), spans);
}

std::vector<TypedSpan> bio_decode(std::span<const BioLabel> labels, bool repair) {
  std::vector<TypedSpan> out;
  bool open = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& label = labels[i];
    switch (label.kind) {
      case BioLabel::Kind::O:
        open = false;
        break;
      case BioLabel::Kind::B:
        out.push_back({label.type, {i, i + 1}});
        open = true;
        break;
      case BioLabel::Kind::I:
        if (open && out.back().type == label.type) {
          out.back().span.end = i + 1;
        } else if (repair) {
          out.push_back({label.type, {i, i + 1}});
          open = true;
        } else {
          throw FormatError("label " + to_string(label) + " at position " + std::to_string(i) +
                            " does not continue a mention of the same type");
        }
        break;
    }
  }
  return out;
}

std::vector<TypedSpan> bio_decode(std::span<const std::string> labels, bool repair) {
  std::vector<BioLabel> parsed;
  parsed.reserve(labels.size());
  for (const auto& l : labels) parsed.push_back(parse_bio_label(l));
  return bio_decode(parsed, repair);
}

std::vector<EntityMention> to_mentions(std::span<const TypedSpan> spans, std::size_t sentence) {
  std::vector<EntityMention> out;
  out.reserve(spans.size());
  for (const auto& s : spans) out.push_back({s.type, sentence, s.span});
  return out;
}

}  // namespace radner
