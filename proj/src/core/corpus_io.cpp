#include "radner/core/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "radner/core/bio.hpp"
#include "radner/core/error.hpp"
#include "radner/core/text_util.hpp"

namespace radner {
namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void line_error(std::size_t line, const std::string& what) {
  throw FormatError("line " + std::to_string(line) + ": " + what);
}

// ---- CoNLL ----------------------------------------------------------------

struct PendingDoc {
  Document doc;
  std::vector<EntityMention> mentions;
  Sentence sentence;
  std::vector<BioLabel> labels;
};

void close_sentence(PendingDoc& p) {
  if (p.sentence.tokens.empty()) return;
  p.sentence.index = p.doc.sentences.size();
  for (const auto& s : bio_decode(p.labels, false)) p.mentions.push_back({s.type, p.sentence.index, s.span});
  p.doc.sentences.push_back(std::move(p.sentence));
  p.sentence = {};
  p.labels.clear();
}

void close_document(PendingDoc& p, const std::string& source, Corpus& corpus) {
  close_sentence(p);
  // CoNLL carries no raw text: rebuild it with single spaces between tokens
  // and one newline between sentences.
  std::string text;
  for (auto& sent : p.doc.sentences) {
    if (!text.empty()) text += '\n';
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      if (i > 0) text += ' ';
      auto& tok = sent.tokens[i];
      tok.start = text.size();
      text += tok.text;
      tok.end = text.size();
    }
  }
  p.doc.raw_text = std::move(text);
  if (!p.doc.raw_text.empty()) p.doc.sections.push_back({"preamble", 0, p.doc.raw_text.size()});
  p.doc.annotations[source] = std::move(p.mentions);
  corpus.documents.push_back(std::move(p.doc));
}

Corpus read_conll(std::istream& in, const std::string& name, const CorpusIoOptions& options) {
  Corpus corpus;
  corpus.name = name;
  std::optional<PendingDoc> pending;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line_error(lineno, "CRLF line endings are not supported");
    if (line.starts_with("-DOCSTART-")) {
      if (pending) close_document(*pending, options.conll_source, corpus);
      std::string id(trim(std::string_view(line).substr(10)));
      if (id.empty()) line_error(lineno, "-DOCSTART- without a document id");
      pending.emplace();
      pending->doc.id = std::move(id);
      continue;
    }
    if (trim(line).empty()) {
      if (pending) close_sentence(*pending);
      continue;
    }
    if (!pending) line_error(lineno, "token line before the first -DOCSTART-");
    auto fields = split(line, '\t');
    if (fields.size() != 3) line_error(lineno, "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) line_error(lineno, "empty token");
    try {
      Token tok;
      tok.text = fields[0];
      tok.pos = parse_pos_tag(fields[1]);
      auto label = parse_bio_label(fields[2]);
      if (label.kind == BioLabel::Kind::I) {
        const auto& labels = pending->labels;
        if (labels.empty() || labels.back().is_outside() || labels.back().type != label.type)
          throw FormatError("label " + fields[2] + " does not continue a mention of the same type");
      }
      pending->sentence.tokens.push_back(std::move(tok));
      pending->labels.push_back(label);
    } catch (const FormatError& e) {
      line_error(lineno, e.what());
    }
  }
  if (pending) close_document(*pending, options.conll_source, corpus);
  validate(corpus);
  return corpus;
}

void write_conll(const Corpus& corpus, std::ostream& out, const CorpusIoOptions& options) {
  for (const auto& doc : corpus.documents) {
    if (doc.id.empty() || doc.id.find_first_of("\t\n\r") != std::string::npos)
      throw InvalidArgument("document id '" + doc.id + "' cannot be written as CoNLL");
    out << "-DOCSTART- " << doc.id << '\n';
    for (const auto& sent : doc.sentences) {
      if (sent.tokens.empty()) throw InvalidArgument("empty sentence in document '" + doc.id + "'");
      auto labels = bio_encode(sent, doc.mentions_in(options.conll_source, sent.index));
      for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
        const auto& tok = sent.tokens[i];
        if (tok.text.find_first_of(" \t\n\r") != std::string::npos)
          throw InvalidArgument("token '" + tok.text + "' contains whitespace");
        out << tok.text << '\t' << to_string(tok.pos) << '\t' << to_string(labels[i]) << '\n';
      }
      out << '\n';
    }
  }
}

// ---- JSONL ----------------------------------------------------------------

template <typename T>
T required(const ordered_json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return obj.at(key).get<T>();
}

Document document_from_json(const ordered_json& j) {
  Document doc;
  doc.id = required<std::string>(j, "id");
  doc.raw_text = required<std::string>(j, "text");
  if (j.contains("sections"))
    for (const auto& s : j.at("sections"))
      doc.sections.push_back({required<std::string>(s, "label"), required<std::size_t>(s, "start"),
                              required<std::size_t>(s, "end")});
  if (j.contains("sentences")) {
    for (const auto& s : j.at("sentences")) {
      Sentence sent;
      sent.index = doc.sentences.size();
      for (const auto& t : s.at("tokens")) {
        Token tok;
        tok.text = required<std::string>(t, "text");
        tok.start = required<std::size_t>(t, "start");
        tok.end = required<std::size_t>(t, "end");
        tok.pos = parse_pos_tag(required<std::string>(t, "pos"));
        sent.tokens.push_back(std::move(tok));
      }
      doc.sentences.push_back(std::move(sent));
    }
  }
  if (j.contains("annotations")) {
    for (const auto& [source, list] : j.at("annotations").items()) {
      std::vector<EntityMention> mentions;
      for (const auto& m : list)
        mentions.push_back({parse_entity_type(required<std::string>(m, "type")), required<std::size_t>(m, "sent"),
                            {required<std::size_t>(m, "start_tok"), required<std::size_t>(m, "end_tok")}});
      sort_mentions(mentions);
      doc.annotations.emplace(source, std::move(mentions));
    }
  }
  return doc;
}

ordered_json document_to_json(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["text"] = doc.raw_text;
  j["sections"] = ordered_json::array();
  for (const auto& s : doc.sections) j["sections"].push_back({{"label", s.label}, {"start", s.start}, {"end", s.end}});
  j["sentences"] = ordered_json::array();
  for (const auto& sent : doc.sentences) {
    ordered_json tokens = ordered_json::array();
    for (const auto& t : sent.tokens)
      tokens.push_back({{"text", t.text}, {"start", t.start}, {"end", t.end}, {"pos", std::string(to_string(t.pos))}});
    j["sentences"].push_back({{"tokens", std::move(tokens)}});
  }
  j["annotations"] = ordered_json::object();
  for (const auto& [source, mentions] : doc.annotations) {
    ordered_json list = ordered_json::array();
    for (const auto& m : mentions)
      list.push_back({{"type", std::string(to_string(m.type))},
                      {"sent", m.sentence},
                      {"start_tok", m.span.start},
                      {"end_tok", m.span.end}});
    j["annotations"][source] = std::move(list);
  }
  return j;
}

Corpus read_jsonl(std::istream& in, const std::string& name) {
  Corpus corpus;
  corpus.name = name;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto doc = document_from_json(ordered_json::parse(line));
      validate(doc);
      corpus.documents.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      line_error(lineno, e.what());
    } catch (const FormatError& e) {
      line_error(lineno, e.what());
    }
  }
  validate(corpus);
  return corpus;
}

}  // namespace

CorpusFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".conll") return CorpusFormat::conll;
  if (ext == ".jsonl") return CorpusFormat::jsonl;
  throw FormatError("cannot infer corpus format from '" + path.string() + "' (expected .conll or .jsonl)");
}

Corpus read_corpus(std::istream& in, CorpusFormat format, const std::string& name, const CorpusIoOptions& options) {
  return format == CorpusFormat::conll ? read_conll(in, name, options) : read_jsonl(in, name);
}

Corpus read_corpus(const std::filesystem::path& path, CorpusFormat format, const CorpusIoOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  try {
    return read_corpus(in, format, path.stem().string(), options);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out, CorpusFormat format, const CorpusIoOptions& options) {
  if (format == CorpusFormat::conll) {
    write_conll(corpus, out, options);
    return;
  }
  for (const auto& doc : corpus.documents) out << document_to_json(doc).dump() << '\n';
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format,
                  const CorpusIoOptions& options) {
  // Serialize fully before touching the file so a failed encode leaves nothing behind.
  std::ostringstream buffer;
  write_corpus(corpus, buffer, format, options);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << buffer.str();
  if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace radner
