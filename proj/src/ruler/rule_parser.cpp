#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/ruler/ruler.hpp"

namespace radner::ruler {
namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno, const std::string& origin)
      : line_(line), lineno_(lineno), origin_(origin) {}

  [[noreturn]] void error(const std::string& what) const { error_at(pos_, what); }

  [[noreturn]] void error_at(std::size_t pos, const std::string& what) const {
    throw FormatError(origin_ + ":" + std::to_string(lineno_) + ":" + std::to_string(pos + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= line_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }

  std::size_t pos() const { return pos_; }

  std::string word() {
    skip_ws();
    std::size_t b = pos_;
    while (pos_ < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos_])) || line_[pos_] == '_' ||
                                   line_[pos_] == '-'))
      ++pos_;
    if (b == pos_) error("expected an identifier");
    return std::string(line_.substr(b, pos_ - b));
  }

  void keyword(std::string_view kw) {
    std::size_t at = (skip_ws(), pos_);
    if (word() != kw) error_at(at, "expected '" + std::string(kw) + "'");
  }

  bool try_consume(std::string_view text) {
    skip_ws();
    if (line_.substr(pos_).starts_with(text)) {
      pos_ += text.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view text) {
    if (!try_consume(text)) error("expected '" + std::string(text) + "'");
  }

  long integer() {
    skip_ws();
    long value = 0;
    auto begin = line_.data() + pos_;
    auto [ptr, ec] = std::from_chars(begin, line_.data() + line_.size(), value);
    if (ec != std::errc() || ptr == begin) error("expected an integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  // Reads text up to an unescaped `close`; `\close` and `\\` are unescaped for
  // quoted literals, while regex bodies keep their backslashes.
  std::string delimited(char close, bool keep_escapes) {
    std::size_t open = pos_ - 1;
    std::string out;
    while (pos_ < line_.size()) {
      char c = line_[pos_++];
      if (c == '\\' && pos_ < line_.size()) {
        char next = line_[pos_++];
        if (keep_escapes && next != close) out += '\\';
        out += next;
        continue;
      }
      if (c == close) return out;
      out += c;
    }
    error_at(open, std::string("unterminated ") + (close == '"' ? "literal" : "regex"));
  }

  EntityType entity_type() {
    std::size_t at = (skip_ws(), pos_);
    auto name = word();
    if (auto t = try_parse_entity_type(name)) return *t;
    error_at(at, "unknown entity type '" + name + "'");
  }

 private:
  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t lineno_;
  const std::string& origin_;
};

Atom parse_atom(LineParser& p, const std::string& rule_name) {
  Atom atom;
  std::size_t at = p.pos();
  char c = p.peek();
  if (c == '"') {
    p.expect("\"");
    atom.kind = Atom::Kind::literal;
    atom.text = to_lower(p.delimited('"', false));
    if (atom.text.empty()) p.error_at(at, "empty literal");
  } else if (c == '/') {
    p.expect("/");
    atom.kind = Atom::Kind::regex;
    atom.text = p.delimited('/', true);
    try {
      atom.regex = std::regex(atom.text, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      p.error_at(at, "rule '" + rule_name + "': malformed regex /" + atom.text + "/: " + e.what());
    }
  } else {
    auto head = p.word();
    if (head == "ANY") {
      atom.kind = Atom::Kind::any;
    } else if (head == "LEX") {
      p.expect("(");
      atom.kind = Atom::Kind::lex;
      atom.type = p.entity_type();
      p.expect(")");
    } else if (head == "POS") {
      p.expect("(");
      atom.kind = Atom::Kind::pos;
      std::size_t tag_at = p.pos();
      auto tag = p.word();
      try {
        atom.pos = parse_pos_tag(tag);
      } catch (const FormatError&) {
        p.error_at(tag_at, "unknown POS tag '" + tag + "'");
      }
      p.expect(")");
    } else {
      p.error_at(at, "unknown atom '" + head + "'");
    }
  }
  // '?' must follow the atom directly.
  atom.optional = p.try_consume("?");
  return atom;
}

AtomRange parse_span(LineParser& p, std::size_t atoms) {
  p.keyword("SPAN");
  std::size_t at = p.pos();
  long first = p.integer();
  p.expect("..");
  long last = p.integer();
  if (first < 0 || last <= first || static_cast<std::size_t>(last) > atoms)
    p.error_at(at, "SPAN " + std::to_string(first) + ".." + std::to_string(last) + " is outside the " +
                       std::to_string(atoms) + "-atom pattern");
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

Rule parse_rule_line(std::string_view line, std::size_t lineno, const std::string& origin) {
  LineParser p(line, lineno, origin);
  Rule rule;
  rule.line = lineno;
  p.keyword("RULE");
  rule.name = p.word();
  p.keyword("PRIORITY");
  rule.priority = static_cast<int>(p.integer());
  p.expect(":");

  while (!p.at_end() && !p.try_consume("=>")) rule.pattern.push_back(parse_atom(p, rule.name));
  if (rule.pattern.empty()) p.error("rule '" + rule.name + "' has an empty pattern");
  if (std::all_of(rule.pattern.begin(), rule.pattern.end(), [](const Atom& a) { return a.optional; }))
    p.error("rule '" + rule.name + "' needs at least one non-optional atom");
  if (p.at_end()) p.error("rule '" + rule.name + "' is missing '=> action'");

  std::size_t action_at = (p.skip_ws(), p.pos());
  auto verb = p.word();
  bool has_lex = std::any_of(rule.pattern.begin(), rule.pattern.end(),
                             [](const Atom& a) { return a.kind == Atom::Kind::lex; });
  if (verb == "ASSIGN") {
    rule.action.kind = Action::Kind::assign;
    rule.action.type = p.entity_type();
    rule.action.span = parse_span(p, rule.pattern.size());
  } else if (verb == "RETYPE") {
    rule.action.kind = Action::Kind::retype;
    rule.action.type = p.entity_type();
    if (!p.at_end()) rule.action.span = parse_span(p, rule.pattern.size());
  } else if (verb == "DELETE") {
    rule.action.kind = Action::Kind::remove;
  } else {
    p.error_at(action_at, "unknown action '" + verb + "'");
  }
  if (rule.action.kind != Action::Kind::assign && !has_lex)
    p.error_at(action_at, verb + " requires a LEX atom in the pattern");
  if (!p.at_end()) p.error("unexpected trailing text");
  return rule;
}

}  // namespace

std::vector<Rule> parse_rules(std::string_view source, const std::string& origin) {
  std::vector<Rule> rules;
  std::set<std::string> names;
  std::size_t lineno = 0;
  std::size_t begin = 0;
  while (begin <= source.size()) {
    auto nl = source.find('\n', begin);
    auto line = source.substr(begin, nl == std::string_view::npos ? std::string_view::npos : nl - begin);
    ++lineno;
    auto content = trim(line);
    if (!content.empty() && content.front() != '#') {
      auto rule = parse_rule_line(line, lineno, origin);
      if (!names.insert(rule.name).second)
        throw FormatError(origin + ":" + std::to_string(lineno) + ":1: duplicate rule name '" + rule.name + "'");
      rules.push_back(std::move(rule));
    }
    if (nl == std::string_view::npos) break;
    begin = nl + 1;
  }
  std::stable_sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) { return a.priority > b.priority; });
  return rules;
}

std::vector<Rule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rules file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rules(buf.str(), path.string());
}

RuleSet RuleSet::load(const std::filesystem::path& lexicon_path, const std::filesystem::path& rules_path) {
  return {Lexicon::load(lexicon_path), load_rules(rules_path)};
}

RuleSet RuleSet::load_dir(const std::filesystem::path& dir) { return load(dir / "lexicon.tsv", dir / "rules.dsl"); }

}  // namespace radner::ruler
