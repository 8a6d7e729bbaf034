#include <algorithm>

#include "radner/core/text_util.hpp"
#include "radner/ruler/ruler.hpp"

namespace radner::ruler {
namespace {

struct Slot {
  EntityMention mention;
  bool locked = false;
};

struct State {
  const Sentence& sentence;
  std::vector<std::string> words;  // lowercased
  std::vector<Slot> slots;
  std::vector<bool> blocked;  // tokens consumed by DELETE
};

struct Match {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<Span> atom_spans;  // empty span (start == end) for skipped optional atoms
  std::vector<std::size_t> lex_targets;
};

// Index of the unlocked mention of `type` starting at `pos`, if any.
std::optional<std::size_t> lex_at(const State& state, std::size_t pos, EntityType type) {
  for (std::size_t i = 0; i < state.slots.size(); ++i) {
    const auto& s = state.slots[i];
    if (!s.locked && s.mention.span.start == pos && s.mention.type == type) return i;
  }
  return std::nullopt;
}

bool token_matches(const Atom& atom, const State& state, std::size_t pos) {
  switch (atom.kind) {
    case Atom::Kind::literal:
      return state.words[pos] == atom.text;
    case Atom::Kind::regex:
      return std::regex_match(state.words[pos], atom.regex);
    case Atom::Kind::pos:
      return state.sentence.tokens[pos].pos == atom.pos;
    case Atom::Kind::any:
      return true;
    case Atom::Kind::lex:
      return false;
  }
  return false;
}

// Backtracking matcher; optional atoms first try to consume.
bool match_from(const Rule& rule, const State& state, std::size_t atom, std::size_t pos, Match& m) {
  if (atom == rule.pattern.size()) {
    m.end = pos;
    return true;
  }
  const Atom& a = rule.pattern[atom];
  std::size_t n = state.words.size();

  if (pos < n) {
    if (a.kind == Atom::Kind::lex) {
      if (auto idx = lex_at(state, pos, a.type)) {
        std::size_t end = state.slots[*idx].mention.span.end;
        m.atom_spans[atom] = {pos, end};
        m.lex_targets.push_back(*idx);
        if (match_from(rule, state, atom + 1, end, m)) return true;
        m.lex_targets.pop_back();
      }
    } else if (token_matches(a, state, pos)) {
      m.atom_spans[atom] = {pos, pos + 1};
      if (match_from(rule, state, atom + 1, pos + 1, m)) return true;
    }
  }
  if (a.optional) {
    m.atom_spans[atom] = {pos, pos};
    return match_from(rule, state, atom + 1, pos, m);
  }
  return false;
}

std::optional<Span> target_span(const Match& m, const std::optional<AtomRange>& range) {
  if (!range) return Span{m.begin, m.end};
  std::optional<Span> out;
  for (std::size_t i = range->first; i < range->last; ++i) {
    const auto& s = m.atom_spans[i];
    if (s.start == s.end) continue;
    if (!out) out = s;
    else out->end = s.end;
  }
  return out;
}

std::string describe(const Rule& rule) { return "rule '" + rule.name + "' (line " + std::to_string(rule.line) + ")"; }

std::string describe(EntityType type, Span span) {
  return std::string(to_string(type)) + " [" + std::to_string(span.start) + "," + std::to_string(span.end) + ")";
}

bool conflicts_with_locked(const State& state, Span span, const std::vector<std::size_t>& ignore) {
  for (std::size_t t = span.start; t < span.end; ++t)
    if (state.blocked[t]) return true;
  for (std::size_t i = 0; i < state.slots.size(); ++i) {
    if (std::find(ignore.begin(), ignore.end(), i) != ignore.end()) continue;
    const auto& s = state.slots[i];
    if (s.locked && s.mention.span.overlaps(span)) return true;
  }
  return false;
}

// Removes the listed slots plus every unlocked slot overlapping `span`, then adds the new locked mention.
void place(State& state, const Rule& rule, EntityType type, Span span, std::vector<std::size_t> remove,
           std::vector<std::string>& diagnostics) {
  for (std::size_t i = 0; i < state.slots.size(); ++i) {
    const auto& s = state.slots[i];
    if (!s.locked && s.mention.span.overlaps(span) && std::find(remove.begin(), remove.end(), i) == remove.end()) {
      diagnostics.push_back(describe(rule) + ": displaced " + describe(s.mention.type, s.mention.span));
      remove.push_back(i);
    }
  }
  std::sort(remove.rbegin(), remove.rend());
  for (auto i : remove) state.slots.erase(state.slots.begin() + static_cast<std::ptrdiff_t>(i));
  state.slots.push_back({{type, state.sentence.index, span}, true});
}

void fire(State& state, const Rule& rule, const Match& m, std::vector<std::string>& diagnostics) {
  const auto& action = rule.action;
  if (action.kind == Action::Kind::remove) {
    auto targets = m.lex_targets;
    std::sort(targets.rbegin(), targets.rend());
    for (auto i : targets) {
      const auto span = state.slots[i].mention.span;
      for (std::size_t t = span.start; t < span.end; ++t) state.blocked[t] = true;
      state.slots.erase(state.slots.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return;
  }

  auto span = target_span(m, action.span);
  if (!span) {
    diagnostics.push_back(describe(rule) + ": designated span matched no tokens");
    return;
  }
  const std::vector<std::size_t> targets = action.kind == Action::Kind::retype ? m.lex_targets : std::vector<std::size_t>{};
  if (conflicts_with_locked(state, *span, targets)) {
    diagnostics.push_back(describe(rule) + ": dropped " + describe(action.type, *span) +
                          " overlapping an earlier rule's output");
    return;
  }
  place(state, rule, action.type, *span, targets, diagnostics);
}

}  // namespace

RuleOutcome apply_rules(const Sentence& sentence, std::vector<EntityMention> lexicon_mentions,
                        const std::vector<Rule>& rules) {
  State state{sentence, lowered_words(sentence), {}, std::vector<bool>(sentence.size(), false)};
  for (auto& m : lexicon_mentions) state.slots.push_back({m, false});

  RuleOutcome outcome;
  for (const auto& rule : rules) {
    std::size_t pos = 0;
    while (pos < state.words.size()) {
      Match m;
      m.begin = pos;
      m.atom_spans.assign(rule.pattern.size(), {});
      if (match_from(rule, state, 0, pos, m) && m.end > pos) {
        fire(state, rule, m, outcome.diagnostics);
        pos = m.end;
      } else {
        ++pos;
      }
    }
  }

  for (auto& s : state.slots) outcome.mentions.push_back(s.mention);
  sort_mentions(outcome.mentions);
  return outcome;
}

}  // namespace radner::ruler
