#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "radner/core/bio.hpp"
#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"
#include "radner/ruler/ruler.hpp"
#include "support/support.hpp"

using namespace radner;
using namespace radner::ruler;
using radner::test::make_sentence;
using radner::test::words_of;

namespace {

Lexicon make_lexicon(const std::vector<std::pair<std::string, EntityType>>& entries) {
  Lexicon lex;
  for (const auto& [phrase, type] : entries) lex.add({words_of(phrase), type});
  return lex;
}

std::vector<EntityMention> run(const std::string& text, const Lexicon& lex, const std::string& rules) {
  const auto sent = make_sentence(words_of(text));
  return apply_rules(sent, apply_lexicon(sent, lex), parse_rules(rules)).mentions;
}

const RuleSet& stock() {
  static const RuleSet r = RuleSet::load_stock();
  return r;
}

std::vector<EntityMention> stock_run(const std::string& text) {
  const auto sent = make_sentence(words_of(text));
  return apply_rules(sent, apply_lexicon(sent, stock().lexicon), stock().rules).mentions;
}

std::string expect_parse_error(const std::string& rules) {
  try {
    parse_rules(rules, "r.dsl");
  } catch (const FormatError& e) {
    return e.what();
  }
  FAIL("expected a parse error for: " << rules);
  return {};
}

}  // namespace

TEST_CASE("lexicon loading") {
  const auto dir = std::filesystem::temp_directory_path() / "radner_ruler_lex";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "lex.tsv") << "# comment\nsmall vessel disease\tsmall_vessel_disease\nSVD\tsmall_vessel_disease\n";
  }
  const auto lex = Lexicon::load(dir / "lex.tsv");
  REQUIRE(lex.entries().size() == 2);
  CHECK(lex.entries()[0].phrase == std::vector<std::string>{"small", "vessel", "disease"});
  CHECK(lex.entries()[1].phrase == std::vector<std::string>{"svd"});
  {
    std::ofstream(dir / "bad.tsv") << "bleed\thaemorrhage\n";
  }
  CHECK_THROWS_AS(Lexicon::load(dir / "bad.tsv"), FormatError);
  CHECK_THROWS_AS(Lexicon::load(dir / "missing.tsv"), IoError);
  std::filesystem::remove_all(dir);

  Lexicon clash;
  clash.add({{"mass"}, EntityType::tumour});
  CHECK_NOTHROW(clash.add({{"mass"}, EntityType::tumour}));
  CHECK_THROWS_AS(clash.add({{"mass"}, EntityType::atrophy}), InvalidArgument);
  CHECK_THROWS_AS(clash.add({{}, EntityType::atrophy}), InvalidArgument);
}

TEST_CASE("apply_lexicon") {
  const auto lex = make_lexicon({{"stroke", EntityType::stroke},
                                 {"ischaemic stroke", EntityType::ischaemic_stroke},
                                 {"small vessel disease", EntityType::small_vessel_disease}});
  CHECK(apply_lexicon(make_sentence(words_of("old ischaemic stroke")), lex) ==
        std::vector<EntityMention>{{EntityType::ischaemic_stroke, 0, {1, 3}}});
  CHECK(apply_lexicon(make_sentence(words_of("Extensive small vessel disease .")), lex) ==
        std::vector<EntityMention>{{EntityType::small_vessel_disease, 0, {1, 4}}});
  CHECK(apply_lexicon(make_sentence(words_of("normal study")), lex).empty());
  CHECK(apply_lexicon(make_sentence(words_of("small vessel stroke")), lex) ==
        std::vector<EntityMention>{{EntityType::stroke, 0, {2, 3}}});
}

TEST_CASE("property: apply_lexicon ignores casing") {
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    auto doc = test::random_document("d", rng, 1, 12);
    auto sent = doc.sentences[0];
    auto shouted = sent;
    for (auto& tok : shouted.tokens)
      for (auto& c : tok.text)
        if (rng.uniform() < 0.5) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    CHECK(apply_lexicon(sent, stock().lexicon) == apply_lexicon(shouted, stock().lexicon));
  }
}

TEST_CASE("rule parsing") {
  const auto rules = parse_rules(
      "# header\n"
      "RULE low PRIORITY 1: \"old\" LEX(stroke) => RETYPE ischaemic_stroke\n"
      "\n"
      "RULE high PRIORITY 5: /^(old|mature)$/ ANY? POS(N) => ASSIGN time_old SPAN 0..1\n"
      "RULE tie PRIORITY 1: LEX(tumour) \"effect\" => DELETE\n");
  REQUIRE(rules.size() == 3);
  CHECK(rules[0].name == "high");
  CHECK(rules[1].name == "low");
  CHECK(rules[2].name == "tie");
  CHECK(rules[0].pattern[1].optional);
  CHECK(rules[0].pattern[2].pos == PosTag::N);
  CHECK(rules[0].action.span->last == 1);
  CHECK_FALSE(rules[1].action.span);
  CHECK(rules[2].action.kind == Action::Kind::remove);
  CHECK(rules[1].line == 2);

  CHECK(expect_parse_error("RULE r PRIORITY 1: /([/ => ASSIGN stroke SPAN 0..1").find("'r'") != std::string::npos);
  CHECK(expect_parse_error("RULE r PRIORITY 1: \"a\" => ASSIGN stroke SPAN 0..1\nRULE r PRIORITY 2: \"b\" => "
                           "ASSIGN stroke SPAN 0..1")
            .find("duplicate") != std::string::npos);
  CHECK(expect_parse_error("RULE r PRIORITY 1: \"a\" => ASSIGN bleed SPAN 0..1").find("r.dsl:1:") == 0);
  CHECK(expect_parse_error("\nRULE r PRIORITY 1: \"a\" => ASSIGN stroke SPAN 0..2").find("r.dsl:2:") == 0);
  expect_parse_error("RULE r PRIORITY 1: ANY? => ASSIGN stroke SPAN 0..1");
  expect_parse_error("RULE r PRIORITY 1: => ASSIGN stroke SPAN 0..1");
  expect_parse_error("RULE r PRIORITY 1: \"a\"");
  expect_parse_error("RULE r PRIORITY 1: \"a\" => DELETE");
  expect_parse_error("RULE r PRIORITY 1: \"a\" => ASSIGN stroke");
  expect_parse_error("RULE r PRIORITY 1: \"a\" => ASSIGN stroke SPAN 0..1 extra");
  expect_parse_error("RULE r PRIORITY 1: POS(XYZ) => ASSIGN stroke SPAN 0..1");
  expect_parse_error("RULE r PRIORITY 1: FOO => ASSIGN stroke SPAN 0..1");
  expect_parse_error("RULE r PRIORITY 1: \"a => ASSIGN stroke SPAN 0..1");
  CHECK(parse_rules("").empty());
}

TEST_CASE("apply_rules") {
  const auto lex = make_lexicon({{"stroke", EntityType::stroke},
                                 {"ischaemic stroke", EntityType::ischaemic_stroke},
                                 {"mass", EntityType::tumour}});
  SUBCASE("retype widens to the whole match") {
    CHECK(run("large haemorrhagic stroke", lex,
              "RULE h PRIORITY 1: \"haemorrhagic\" LEX(stroke) => RETYPE haemorrhagic_stroke") ==
          std::vector<EntityMention>{{EntityType::haemorrhagic_stroke, 0, {1, 3}}});
  }
  SUBCASE("optional gap matches both sizes") {
    const std::string rule = "RULE o PRIORITY 1: \"old\" ANY? LEX(ischaemic_stroke) => ASSIGN time_old SPAN 0..1";
    CHECK(run("old ischaemic stroke", lex, rule) ==
          std::vector<EntityMention>{{EntityType::time_old, 0, {0, 1}}, {EntityType::ischaemic_stroke, 0, {1, 3}}});
    CHECK(run("old left ischaemic stroke", lex, rule) ==
          std::vector<EntityMention>{{EntityType::time_old, 0, {0, 1}}, {EntityType::ischaemic_stroke, 0, {2, 4}}});
    CHECK(run("old left frontal ischaemic stroke", lex, rule) ==
          std::vector<EntityMention>{{EntityType::ischaemic_stroke, 0, {3, 5}}});
  }
  SUBCASE("empty rule list is the identity") {
    const auto sent = make_sentence(words_of("old stroke and mass"));
    const auto lexed = apply_lexicon(sent, lex);
    CHECK(apply_rules(sent, lexed, {}).mentions == lexed);
  }
  SUBCASE("delete removes the lexicon mention") {
    CHECK(run("no mass effect", lex, "RULE d PRIORITY 1: LEX(tumour) \"effect\" => DELETE").empty());
  }
  SUBCASE("consumed mentions cannot be re-fired on") {
    const std::string rules =
        "RULE first PRIORITY 2: \"old\" LEX(stroke) => RETYPE ischaemic_stroke SPAN 1..2\n"
        "RULE second PRIORITY 1: LEX(stroke) => DELETE\n";
    CHECK(run("old stroke", lex, rules) == std::vector<EntityMention>{{EntityType::ischaemic_stroke, 0, {1, 2}}});
  }
  SUBCASE("a lower-priority overlap is dropped and reported") {
    const std::string rules =
        "RULE a PRIORITY 2: \"left\" \"frontal\" => ASSIGN loc_cortical SPAN 0..2\n"
        "RULE b PRIORITY 1: \"frontal\" \"lobe\" => ASSIGN loc_cortical SPAN 0..2\n";
    const auto sent = make_sentence(words_of("left frontal lobe"));
    const auto out = apply_rules(sent, {}, parse_rules(rules));
    CHECK(out.mentions == std::vector<EntityMention>{{EntityType::loc_cortical, 0, {0, 2}}});
    REQUIRE(out.diagnostics.size() == 1);
    CHECK(out.diagnostics[0].find("b") != std::string::npos);
  }
}

TEST_CASE("priority monotonicity on a constructed conflict") {
  const auto sent = make_sentence(words_of("left frontal lobe"));
  for (int high = 0; high < 2; ++high) {
    const std::string rules = std::string("RULE cortical PRIORITY ") + (high ? "9" : "1") +
                              ": \"frontal\" \"lobe\" => ASSIGN loc_cortical SPAN 0..2\n"
                              "RULE deep PRIORITY 5: \"left\" \"frontal\" => ASSIGN loc_deep SPAN 0..2\n";
    const auto out = apply_rules(sent, {}, parse_rules(rules)).mentions;
    REQUIRE(out.size() == 1);
    CHECK(out[0].type == (high ? EntityType::loc_cortical : EntityType::loc_deep));
  }
}

TEST_CASE("property: random rulesets never produce overlaps") {
  Rng rng(2024);
  const std::vector<std::string> atoms = {"\"old\"", "\"the\"", "/^(in|no)$/", "LEX(stroke)", "LEX(tumour)",
                                          "LEX(loc_cortical)", "POS(N)", "ANY", "ANY?", "\"left\"?"};
  const std::vector<std::string> types = {"stroke", "tumour", "time_old", "atrophy"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string rules;
    const std::size_t n_rules = 1 + rng.below(6);
    for (std::size_t r = 0; r < n_rules; ++r) {
      const std::size_t n_atoms = 1 + rng.below(4);
      std::string pattern = "\"x\"";
      std::size_t fixed = 1;
      for (std::size_t a = 1; a < n_atoms; ++a) {
        pattern += " " + atoms[rng.below(atoms.size())];
        ++fixed;
      }
      if (rng.uniform() < 0.5) pattern = "LEX(stroke) " + pattern, ++fixed;
      std::string action;
      const auto kind = rng.below(3);
      const std::string type = types[rng.below(types.size())];
      const std::size_t first = rng.below(fixed);
      const std::size_t last = first + 1 + rng.below(fixed - first);
      if (kind == 0 || pattern.find("LEX") == std::string::npos)
        action = "ASSIGN " + type + " SPAN " + std::to_string(first) + ".." + std::to_string(last);
      else if (kind == 1)
        action = "RETYPE " + type + (rng.uniform() < 0.5 ? " SPAN " + std::to_string(first) + ".." + std::to_string(last) : "");
      else
        action = "DELETE";
      rules += "RULE r" + std::to_string(r) + " PRIORITY " + std::to_string(rng.below(4)) + ": " + pattern + " => " +
               action + "\n";
    }
    const auto parsed = parse_rules(rules);
    static const std::vector<std::string> words = {"x", "old", "the", "in", "no", "stroke", "mass", "frontal", "left"};
    std::vector<std::string> toks(1 + rng.below(14));
    for (auto& w : toks) w = words[rng.below(words.size())];
    const auto sent = make_sentence(toks);
    const auto first = apply_rules(sent, apply_lexicon(sent, stock().lexicon), parsed);
    CHECK_NOTHROW(bio_encode(sent, first.mentions));
    const auto again = apply_rules(sent, apply_lexicon(sent, stock().lexicon), parsed);
    CHECK(again.mentions == first.mentions);
    CHECK(again.diagnostics == first.diagnostics);
  }
}

TEST_CASE("stock ruleset") {
  CHECK(stock().lexicon.entries().size() >= 100);
  CHECK(stock().rules.size() >= 15);
  std::set<EntityType> covered;
  for (const auto& e : stock().lexicon.entries()) covered.insert(e.type);
  for (const auto& r : stock().rules)
    if (r.action.kind != Action::Kind::remove) covered.insert(r.action.type);
  CHECK(covered.size() == kNumEntityTypes);

  using M = std::vector<EntityMention>;
  CHECK(stock_run("old ischaemic stroke") ==
        M{{EntityType::time_old, 0, {0, 1}}, {EntityType::ischaemic_stroke, 0, {1, 3}}});
  CHECK(stock_run("acute haemorrhagic stroke") ==
        M{{EntityType::time_recent, 0, {0, 1}}, {EntityType::haemorrhagic_stroke, 0, {1, 3}}});
  CHECK(stock_run("no mass effect").empty());
  CHECK(stock_run("frontal sinuses are clear").empty());
  CHECK(stock_run("previous CT scan") == M{});
}

TEST_CASE("annotate_rule_based") {
  const auto pipeline = textproc::Pipeline::load_stock();
  SUBCASE("raw text") {
    Document doc{"r1", "CT Head:\nThere is an old ischaemic stroke in the left frontal lobe.", {}, {}, {}};
    annotate_rule_based(doc, stock(), pipeline);
    const auto& m = doc.annotations.at(std::string(kSource));
    std::set<EntityType> types;
    for (const auto& x : m) types.insert(x.type);
    CHECK(types.contains(EntityType::ischaemic_stroke));
    CHECK(types.contains(EntityType::time_old));
    CHECK(types.contains(EntityType::loc_cortical));
  }
  SUBCASE("empty document") {
    Document doc{"e", "", {}, {}, {}};
    annotate_rule_based(doc, stock(), pipeline);
    CHECK(doc.annotations.at(std::string(kSource)).empty());
  }
  SUBCASE("pre-tokenized input matches the per-sentence path") {
    auto doc = test::make_document("t", {{"Old", "lacunar", "infarct", "."}, {"Mild", "atrophy", "."}});
    annotate_rule_based(doc, stock(), pipeline);
    std::vector<EntityMention> expected;
    for (const auto& sent : doc.sentences) {
      auto out = apply_rules(sent, apply_lexicon(sent, stock().lexicon), stock().rules).mentions;
      expected.insert(expected.end(), out.begin(), out.end());
    }
    CHECK(doc.sentences.size() == 2);
    CHECK(doc.annotations.at(std::string(kSource)) == expected);
  }
}
