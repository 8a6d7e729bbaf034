#include "radner/core/text_util.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::textproc {

bool is_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

std::vector<Token> tokenize(std::string_view text, std::size_t base_offset) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t b, std::size_t e) {
    tokens.push_back({std::string(text.substr(b, e - b)), base_offset + b, base_offset + e, PosTag::OTHER});
  };

  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    std::size_t e = i;
    if (b == e) continue;

    while (b < e && is_punct(text[b])) {
      emit(b, b + 1);
      ++b;
    }
    std::size_t core_end = e;
    while (core_end > b && is_punct(text[core_end - 1])) --core_end;
    if (core_end > b) emit(b, core_end);
    for (std::size_t k = core_end; k < e; ++k) emit(k, k + 1);
  }
  return tokens;
}

}  // namespace radner::textproc
