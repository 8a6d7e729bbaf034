#include "radner/core/document.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string_view>

#include "radner/core/error.hpp"

namespace radner {
namespace {

constexpr std::array<std::string_view, 10> kPosNames = {"N", "V", "ADJ", "ADV", "PREP",
                                                        "DET", "CONJ", "NUM", "PUNC", "OTHER"};

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += extra + 1;
  }
  return true;
}

[[noreturn]] void fail(const Document& doc, const std::string& what) {
  throw FormatError("document '" + doc.id + "': " + what);
}

void check_mentions(const Document& doc, const std::string& source, const std::vector<EntityMention>& mentions) {
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    const auto& m = mentions[i];
    if (m.sentence >= doc.sentences.size())
      fail(doc, "source '" + source + "' mention refers to missing sentence " + std::to_string(m.sentence));
    if (m.span.start >= m.span.end || m.span.end > doc.sentences[m.sentence].size())
      fail(doc, "source '" + source + "' mention has invalid token span [" + std::to_string(m.span.start) + "," +
                    std::to_string(m.span.end) + ") in sentence " + std::to_string(m.sentence));
    if (i > 0) {
      const auto& prev = mentions[i - 1];
      if (prev.sentence == m.sentence && prev.span.overlaps(m.span))
        fail(doc, "source '" + source + "' has overlapping mentions in sentence " + std::to_string(m.sentence));
    }
  }
}

}  // namespace

std::string_view to_string(PosTag tag) { return kPosNames.at(static_cast<std::size_t>(tag)); }

PosTag parse_pos_tag(std::string_view name) {
  for (std::size_t i = 0; i < kPosNames.size(); ++i)
    if (kPosNames[i] == name) return static_cast<PosTag>(i);
  throw FormatError("unknown POS tag '" + std::string(name) + "'");
}

std::vector<EntityMention> Document::mentions_in(const std::string& source, std::size_t index) const {
  std::vector<EntityMention> out;
  auto it = annotations.find(source);
  if (it == annotations.end()) return out;
  for (const auto& m : it->second)
    if (m.sentence == index) out.push_back(m);
  return out;
}

void sort_mentions(std::vector<EntityMention>& mentions) {
  std::sort(mentions.begin(), mentions.end(), [](const EntityMention& a, const EntityMention& b) {
    if (a.sentence != b.sentence) return a.sentence < b.sentence;
    if (a.span != b.span) return a.span < b.span;
    return a.type < b.type;
  });
}

void set_annotations(Document& doc, const std::string& source, std::vector<EntityMention> mentions) {
  sort_mentions(mentions);
  try {
    check_mentions(doc, source, mentions);
  } catch (const FormatError& e) {
    throw InvalidArgument(e.what());
  }
  doc.annotations[source] = std::move(mentions);
}

void validate(const Document& doc) {
  if (!valid_utf8(doc.raw_text)) fail(doc, "text is not valid UTF-8");
  const std::size_t n = doc.raw_text.size();

  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < doc.sections.size(); ++i) {
    const auto& s = doc.sections[i];
    if (s.start > s.end || s.end > n) fail(doc, "section '" + s.label + "' has an invalid range");
    if (i > 0 && s.start != prev_end) fail(doc, "sections do not partition the text");
    prev_end = s.end;
  }

  std::size_t last_end = 0;
  bool first = true;
  for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
    const auto& sent = doc.sentences[si];
    if (sent.index != si) fail(doc, "sentence index " + std::to_string(sent.index) + " at position " + std::to_string(si));
    for (const auto& tok : sent.tokens) {
      if (tok.start >= tok.end || tok.end > n) fail(doc, "token '" + tok.text + "' has invalid offsets");
      if (std::string_view(doc.raw_text).substr(tok.start, tok.end - tok.start) != tok.text)
        fail(doc, "token '" + tok.text + "' does not match the text at its offsets");
      if (!first && tok.start < last_end) fail(doc, "tokens overlap or are out of order at '" + tok.text + "'");
      if (!doc.sections.empty() && (tok.start < doc.sections.front().start || tok.end > doc.sections.back().end))
        fail(doc, "token '" + tok.text + "' lies outside all sections");
      last_end = tok.end;
      first = false;
    }
  }

  for (const auto& [source, mentions] : doc.annotations) {
    if (!std::is_sorted(mentions.begin(), mentions.end(), [](const auto& a, const auto& b) {
          return a.sentence != b.sentence ? a.sentence < b.sentence : a.span < b.span;
        }))
      fail(doc, "mentions of source '" + source + "' are not sorted");
    check_mentions(doc, source, mentions);
  }
}

void validate(const Corpus& corpus) {
  std::set<std::string_view> ids;
  for (const auto& doc : corpus.documents) {
    if (!ids.insert(doc.id).second) throw FormatError("duplicate document id '" + doc.id + "'");
    validate(doc);
  }
}

}  // namespace radner
