#include <cctype>

#include "radner/core/text_util.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::textproc {
namespace {

constexpr std::size_t kMaxHeaderWords = 6;

bool is_header_line(std::string_view line) {
  line = trim(line);
  if (line.size() < 2 || line.back() != ':') return false;
  auto title = trim(line.substr(0, line.size() - 1));
  if (title.empty() || !(title.front() >= 'A' && title.front() <= 'Z')) return false;
  for (char c : title) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::isalnum(u) || c == ' ' || c == '-' || c == '/' || c == '(' || c == ')' || c == '&' || c == '\''))
      return false;
  }
  auto words = split_whitespace(title);
  return !words.empty() && words.size() <= kMaxHeaderWords;
}

std::string header_title(std::string_view line) {
  line = trim(line);
  auto words = split_whitespace(line.substr(0, line.size() - 1));
  std::string title;
  for (const auto& w : words) {
    if (!title.empty()) title += ' ';
    title += w;
  }
  return title;
}

}  // namespace

std::vector<Section> section_report(std::string_view text) {
  std::vector<Section> sections;
  if (text.empty()) return sections;

  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    auto nl = text.find('\n', line_start);
    std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(line_start, line_end - line_start);
    if (is_header_line(line)) {
      if (sections.empty() && line_start > 0) sections.push_back({std::string(kPreambleLabel), 0, line_start});
      if (!sections.empty()) sections.back().end = line_start;
      sections.push_back({header_title(line), line_start, text.size()});
    }
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  if (sections.empty()) sections.push_back({std::string(kPreambleLabel), 0, text.size()});
  return sections;
}

std::size_t section_body_start(std::string_view text, const Section& section) {
  // Header titles start uppercase, so a "preamble" label never names a header.
  if (section.label == kPreambleLabel) return section.start;
  auto nl = text.find('\n', section.start);
  if (nl == std::string_view::npos || nl >= section.end) return section.end;
  return nl + 1;
}

}  // namespace radner::textproc
