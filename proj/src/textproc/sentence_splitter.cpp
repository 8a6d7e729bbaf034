#include <fstream>

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::textproc {
namespace {

bool is_terminal(std::string_view t) { return t == "." || t == "!" || t == "?"; }
bool is_closer(std::string_view t) { return t == ")" || t == "]" || t == "\"" || t == "'"; }

bool all_digits(std::string_view t) {
  if (t.empty()) return false;
  for (char c : t)
    if (c < '0' || c > '9') return false;
  return true;
}

// Whether the line starting at token `i` opens a list item ("- ...", "* ...", "1. ...", "2) ...").
bool starts_list_item(std::span<const Token> tokens, std::size_t i) {
  const auto& t = tokens[i].text;
  if (t == "-" || t == "*" || t == "\xE2\x80\xA2") return true;
  return all_digits(t) && i + 1 < tokens.size() && (tokens[i + 1].text == "." || tokens[i + 1].text == ")") &&
         tokens[i + 1].start == tokens[i].end;
}

}  // namespace

AbbreviationList::AbbreviationList(std::span<const std::string> entries) {
  for (const auto& e : entries) {
    if (e.empty() || e.back() != '.') throw FormatError("abbreviation '" + e + "' does not end with '.'");
    entries_.insert(to_lower(e));
  }
}

AbbreviationList AbbreviationList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open abbreviation list '" + path.string() + "'");
  std::vector<std::string> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto entry = strip_comment(line);
    if (entry.empty()) continue;
    if (entry.back() != '.')
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": abbreviation must end with '.'");
    entries.emplace_back(entry);
  }
  return AbbreviationList(entries);
}

std::vector<Sentence> split_sentences(std::string_view text, std::span<const Token> tokens,
                                      const AbbreviationList& abbrevs) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t line_first = 0;  // index of the first token on the current line

  auto flush = [&] {
    if (current.tokens.empty()) return;
    current.index = sentences.size();
    sentences.push_back(std::move(current));
    current = {};
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    current.tokens.push_back(tokens[i]);
    const auto& tok = tokens[i];
    bool last = i + 1 == tokens.size();

    if (is_terminal(tok.text)) {
      bool abbreviation = false;
      if (tok.text == "." && i > 0 && tokens[i - 1].end == tok.start)
        abbreviation = abbrevs.contains(to_lower(tokens[i - 1].text) + ".") ||
                       (i - 1 == line_first && starts_list_item(tokens, line_first));
      if (!abbreviation) {
        while (!last && is_closer(tokens[i + 1].text) && tokens[i + 1].start == tokens[i].end) {
          current.tokens.push_back(tokens[++i]);
          last = i + 1 == tokens.size();
        }
        flush();
      }
    }
    if (last) break;

    auto gap = text.substr(tokens[i].end, tokens[i + 1].start - tokens[i].end);
    auto nl = gap.find('\n');
    if (nl != std::string_view::npos) {
      bool paragraph = gap.find('\n', nl + 1) != std::string_view::npos;
      if (paragraph || starts_list_item(tokens, line_first) || starts_list_item(tokens, i + 1)) flush();
      line_first = i + 1;
    }
  }
  flush();
  return sentences;
}

}  // namespace radner::textproc
