#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "radner/core/bio.hpp"
#include "radner/core/corpus_io.hpp"
#include "radner/core/corpus_ops.hpp"
#include "radner/core/error.hpp"
#include "support/support.hpp"

using namespace radner;
using radner::test::make_document;
using radner::test::make_sentence;

namespace {

std::vector<std::string> label_strings(const std::vector<BioLabel>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(to_string(l));
  return out;
}

std::string to_text(const Corpus& c, CorpusFormat f) {
  std::ostringstream out;
  write_corpus(c, out, f);
  return out.str();
}

Corpus from_text(const std::string& text, CorpusFormat f, const std::string& name = "c") {
  std::istringstream in(text);
  return read_corpus(in, f, name);
}

Corpus random_corpus(Rng& rng, std::size_t docs, bool extra_sources) {
  Corpus c{"c", {}};
  for (std::size_t d = 0; d < docs; ++d) {
    auto doc = test::random_document("doc-" + std::to_string(d), rng);
    for (auto& sent : doc.sentences)
      for (auto& tok : sent.tokens) tok.pos = static_cast<PosTag>(rng.below(10));
    set_annotations(doc, "gold", test::random_mentions(doc, rng));
    if (extra_sources) set_annotations(doc, "ruler", test::random_mentions(doc, rng));
    c.documents.push_back(std::move(doc));
  }
  return c;
}

// Hand-built fixture: 2 docs, 3 sentences, 4 gold mentions.
Corpus stats_fixture() {
  auto a = make_document("a", {{"small", "mass", "and", "another", "mass"}, {"mild", "atrophy"}});
  set_annotations(a, "gold", {{EntityType::tumour, 0, {1, 2}}, {EntityType::tumour, 0, {4, 5}},
                              {EntityType::atrophy, 1, {1, 2}}});
  auto b = make_document("b", {{"old", "infarct"}});
  set_annotations(b, "gold", {{EntityType::time_old, 0, {0, 1}}});
  return {"fixture", {a, b}};
}

}  // namespace

TEST_CASE("entity type names round-trip in inventory order") {
  CHECK(all_entity_types().size() == 17);
  for (std::size_t i = 0; i < kNumEntityTypes; ++i) {
    auto t = all_entity_types()[i];
    CHECK(index_of(t) == i);
    CHECK(parse_entity_type(to_string(t)) == t);
  }
  CHECK(to_string(EntityType::ischaemic_stroke) == "ischaemic_stroke");
  CHECK(to_string(EntityType::time_recent) == "time_recent");
  CHECK_FALSE(try_parse_entity_type("Tumour"));
  CHECK_THROWS_AS(parse_entity_type("bleed"), FormatError);
}

TEST_CASE("bio_encode") {
  const auto sent = make_sentence({"a", "b", "c", "d"});
  SUBCASE("single mention") {
    std::vector<EntityMention> m{{EntityType::tumour, 0, {1, 3}}};
    CHECK(label_strings(bio_encode(sent, m)) == std::vector<std::string>{"O", "B-tumour", "I-tumour", "O"});
  }
  SUBCASE("no mentions") {
    CHECK(label_strings(bio_encode(sent, {})) == std::vector<std::string>(4, "O"));
  }
  SUBCASE("adjacent same-type mentions") {
    std::vector<TypedSpan> spans{{EntityType::stroke, {0, 1}}, {EntityType::stroke, {1, 2}}};
    CHECK(label_strings(bio_encode(2, spans)) == std::vector<std::string>{"B-stroke", "B-stroke"});
  }
  SUBCASE("overlap and range errors") {
    std::vector<TypedSpan> overlap{{EntityType::stroke, {0, 2}}, {EntityType::tumour, {1, 3}}};
    CHECK_THROWS_AS(bio_encode(4, overlap), InvalidArgument);
    std::vector<TypedSpan> outside{{EntityType::stroke, {3, 5}}};
    CHECK_THROWS_AS(bio_encode(4, outside), InvalidArgument);
    std::vector<EntityMention> wrong_sentence{{EntityType::stroke, 1, {0, 1}}};
    CHECK_THROWS_AS(bio_encode(sent, wrong_sentence), InvalidArgument);
  }
}

TEST_CASE("bio_decode") {
  using V = std::vector<std::string>;
  using S = std::vector<TypedSpan>;
  CHECK(bio_decode(V{"O", "B-tumour", "I-tumour", "O"}, false) == S{{EntityType::tumour, {1, 3}}});
  CHECK(bio_decode(V{"O", "I-stroke"}, true) == S{{EntityType::stroke, {1, 2}}});
  CHECK(bio_decode(V{"B-atrophy", "I-tumour"}, true) ==
        S{{EntityType::atrophy, {0, 1}}, {EntityType::tumour, {1, 2}}});
  CHECK_THROWS_AS(bio_decode(V{"O", "I-stroke"}, false), FormatError);
  CHECK_THROWS_AS(bio_decode(V{"B-atrophy", "I-tumour"}, false), FormatError);
  CHECK_THROWS_AS(bio_decode(V{"B-lesion"}, true), FormatError);
  CHECK(bio_decode(V{}, false).empty());
}

TEST_CASE("property: bio_decode inverts bio_encode on random layouts") {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng.below(12);
    std::vector<TypedSpan> spans;
    std::size_t pos = 0;
    while (pos < n) {
      if (rng.uniform() < 0.4) {
        std::size_t len = 1 + rng.below(std::min<std::size_t>(4, n - pos));
        spans.push_back({test::random_type(rng), {pos, pos + len}});
        pos += len;
      } else {
        ++pos;
      }
    }
    const auto labels = bio_encode(n, spans);
    REQUIRE(labels.size() == n);
    CHECK(bio_decode(labels, false) == spans);
    CHECK(bio_decode(labels, true) == spans);
  }
}

TEST_CASE("property: repaired decoding always yields non-overlapping spans") {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<BioLabel> labels(rng.below(10));
    for (auto& l : labels) {
      auto k = rng.below(3);
      auto t = test::random_type(rng);
      l = k == 0 ? BioLabel::outside() : k == 1 ? BioLabel::begin(t) : BioLabel::inside(t);
    }
    const auto spans = bio_decode(labels, true);
    CHECK_NOTHROW(bio_encode(labels.size(), spans));
  }
}

TEST_CASE("set_annotations sorts and rejects overlap") {
  auto doc = make_document("d", {{"a", "b", "c"}, {"d"}});
  set_annotations(doc, "x", {{EntityType::atrophy, 1, {0, 1}}, {EntityType::tumour, 0, {1, 3}}});
  CHECK(doc.annotations["x"].front().sentence == 0);
  CHECK(doc.mentions_in("x", 1).size() == 1);
  CHECK_THROWS_AS(set_annotations(doc, "x", {{EntityType::atrophy, 0, {0, 2}}, {EntityType::tumour, 0, {1, 3}}}),
                  InvalidArgument);
  CHECK_THROWS_AS(set_annotations(doc, "x", {{EntityType::atrophy, 0, {2, 4}}}), InvalidArgument);
  CHECK_THROWS_AS(set_annotations(doc, "x", {{EntityType::atrophy, 2, {0, 1}}}), InvalidArgument);
}

TEST_CASE("validate catches broken documents") {
  auto good = make_document("d", {{"old", "infarct"}});
  CHECK_NOTHROW(validate(good));

  auto bad_slice = good;
  bad_slice.sentences[0].tokens[1].text = "infarcts";
  CHECK_THROWS_AS(validate(bad_slice), FormatError);

  auto bad_utf8 = good;
  bad_utf8.raw_text[0] = '\xC3';
  bad_utf8.sentences[0].tokens[0].text[0] = '\xC3';
  CHECK_THROWS_AS(validate(bad_utf8), FormatError);

  auto bad_section = good;
  bad_section.sections[0].end -= 3;
  CHECK_THROWS_AS(validate(bad_section), FormatError);

  Corpus dup{"c", {good, good}};
  CHECK_THROWS_AS(validate(dup), FormatError);
}

TEST_CASE("CoNLL reading") {
  const std::string text =
      "-DOCSTART- r1\n"
      "Old\tADJ\tB-time_old\n"
      "infarct\tN\tB-ischaemic_stroke\n"
      "\n"
      "-DOCSTART- r2\n"
      "Small\tADJ\tO\n"
      "vessel\tN\tB-small_vessel_disease\n"
      "disease\tN\tI-small_vessel_disease\n"
      "\n";
  const auto c = from_text(text, CorpusFormat::conll);
  REQUIRE(c.documents.size() == 2);
  CHECK(c.documents[0].id == "r1");
  CHECK(c.documents[1].raw_text == "Small vessel disease");
  CHECK(c.documents[1].annotations.at("gold") ==
        std::vector<EntityMention>{{EntityType::small_vessel_disease, 0, {1, 3}}});
  CHECK(c.documents[0].sentences[0].tokens[0].pos == PosTag::ADJ);

  SUBCASE("I- after O names the line") {
    const std::string bad = "-DOCSTART- r1\nOld\tADJ\tO\ninfarct\tN\tI-ischaemic_stroke\n\n";
    try {
      from_text(bad, CorpusFormat::conll);
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("malformed lines") {
    CHECK_THROWS_AS(from_text("-DOCSTART- r1\nOld\tADJ\n\n", CorpusFormat::conll), FormatError);
    CHECK_THROWS_AS(from_text("-DOCSTART- r1\nOld\tXYZ\tO\n\n", CorpusFormat::conll), FormatError);
    CHECK_THROWS_AS(from_text("Old\tADJ\tO\n\n", CorpusFormat::conll), FormatError);
    CHECK_THROWS_AS(from_text("-DOCSTART- r1\r\nOld\tADJ\tO\r\n\r\n", CorpusFormat::conll), FormatError);
  }
}

TEST_CASE("CoNLL writing") {
  SUBCASE("one sentence is one blank-line-terminated block") {
    Corpus c{"c", {make_document("r1", {{"mild", "atrophy"}})}};
    set_annotations(c.documents[0], "gold", {{EntityType::atrophy, 0, {1, 2}}});
    CHECK(to_text(c, CorpusFormat::conll) == "-DOCSTART- r1\nmild\tN\tO\natrophy\tN\tB-atrophy\n\n");
  }
  SUBCASE("tokens with whitespace cannot be written") {
    Corpus c{"c", {make_document("r1", {{"a"}})}};
    c.documents[0].sentences[0].tokens[0].text = "a b";
    CHECK_THROWS(to_text(c, CorpusFormat::conll));
  }
}

TEST_CASE("JSONL reading and writing") {
  CHECK(to_text(Corpus{"empty", {}}, CorpusFormat::jsonl).empty());
  CHECK(from_text("", CorpusFormat::jsonl).documents.empty());

  const auto c = from_text(R"({"id":"r1","text":"Mild atrophy."})" "\n", CorpusFormat::jsonl);
  REQUIRE(c.documents.size() == 1);
  CHECK(c.documents[0].sentences.empty());

  CHECK_THROWS_AS(from_text("{\"id\":\"r1\"}\n", CorpusFormat::jsonl), FormatError);
  CHECK_THROWS_AS(from_text("{not json\n", CorpusFormat::jsonl), FormatError);
  const std::string overlap =
      R"({"id":"r1","text":"a b","sections":[{"label":"preamble","start":0,"end":3}],)"
      R"("sentences":[{"tokens":[{"text":"a","start":0,"end":1,"pos":"N"},{"text":"b","start":2,"end":3,"pos":"N"}]}],)"
      R"("annotations":{"gold":[{"type":"tumour","sent":0,"start_tok":0,"end_tok":2},{"type":"atrophy","sent":0,"start_tok":1,"end_tok":2}]}})"
      "\n";
  CHECK_THROWS_AS(from_text(overlap, CorpusFormat::jsonl), FormatError);
}

TEST_CASE("property: corpus I/O round-trips") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto jsonl = random_corpus(rng, 1 + rng.below(5), true);
    CHECK(from_text(to_text(jsonl, CorpusFormat::jsonl), CorpusFormat::jsonl) == jsonl);

    const auto conll = random_corpus(rng, 1 + rng.below(5), false);
    const auto text = to_text(conll, CorpusFormat::conll);
    const auto back = from_text(text, CorpusFormat::conll);
    CHECK(back == conll);
    CHECK(to_text(back, CorpusFormat::conll) == text);
  }
}

TEST_CASE("corpus files round-trip through the filesystem") {
  Rng rng(3);
  const auto c = random_corpus(rng, 3, true);
  const auto dir = std::filesystem::temp_directory_path() / "radner_core_io";
  std::filesystem::create_directories(dir);
  write_corpus(c, dir / "c.jsonl", CorpusFormat::jsonl);
  CHECK(read_corpus(dir / "c.jsonl", format_from_path(dir / "c.jsonl")) == c);
  CHECK_THROWS_AS(format_from_path("c.txt"), FormatError);
  CHECK_THROWS_AS(read_corpus(dir / "missing.jsonl", CorpusFormat::jsonl), IoError);
  CHECK_THROWS_AS(write_corpus(c, dir / "no" / "such" / "dir" / "c.jsonl", CorpusFormat::jsonl), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("corpus_stats") {
  CHECK(corpus_stats(Corpus{}) == StatsReport{});

  const auto s = corpus_stats(stats_fixture());
  CHECK(s.reports == 2);
  CHECK(s.sentences == 3);
  CHECK(s.entities == 4);
  CHECK(s.per_type[index_of(EntityType::tumour)] == 2);
  CHECK(s.per_type[index_of(EntityType::atrophy)] == 1);
  CHECK(s.per_type[index_of(EntityType::time_old)] == 1);

  CHECK_THROWS_AS(corpus_stats(stats_fixture(), "ruler"), InvalidArgument);
}

TEST_CASE("property: corpus_stats agrees with an independent recount") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = random_corpus(rng, 1 + rng.below(6), false);
    const auto s = corpus_stats(c);
    std::size_t sentences = 0, entities = 0, summed = 0;
    std::array<std::size_t, kNumEntityTypes> per_type{};
    for (const auto& doc : c.documents) {
      sentences += doc.sentences.size();
      for (std::size_t i = 0; i < doc.sentences.size(); ++i)
        for (const auto& m : doc.mentions_in("gold", i)) {
          ++entities;
          ++per_type[index_of(m.type)];
        }
    }
    for (auto n : s.per_type) summed += n;
    CHECK(s.sentences == sentences);
    CHECK(s.entities == entities);
    CHECK(summed == s.entities);
    CHECK(s.per_type == per_type);
  }
}

TEST_CASE("filter_corpus") {
  Corpus c{"c",
           {make_document("a", {{"Small", "subdural", "collection"}}), make_document("b", {{"Haemorrhage", "seen"}}),
            make_document("c", {{"normal", "study"}})}};
  const std::vector<std::string> subdural{"subdural"};
  CHECK(filter_corpus(c, subdural).documents.size() == 1);
  CHECK(keyword_matches("haemorrh*", "haemorrhage"));
  CHECK(keyword_matches("HAEMORRH*", "Haemorrhage"));
  CHECK_FALSE(keyword_matches("haemorrh", "haemorrhage"));
  const std::vector<std::string> none{"glioma"};
  CHECK(filter_corpus(c, none).documents.empty());
  CHECK(c.documents.size() == 3);

  const std::vector<std::string> empty_pattern{""};
  CHECK_THROWS_AS(filter_corpus(c, empty_pattern), InvalidArgument);
  CHECK_THROWS_AS(filter_corpus(c, std::vector<std::string>{}), InvalidArgument);

  const std::vector<std::string> both{"haemorrh*", "study"};
  const auto once = filter_corpus(c, both);
  CHECK(once.documents.size() == 2);
  CHECK(filter_corpus(once, both) == once);
}
