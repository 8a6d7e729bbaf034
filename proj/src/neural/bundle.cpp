#include "radner/neural/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "radner/core/error.hpp"

namespace radner::neural {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string model_file_name(const TaggerModel& model) {
  return model.type ? "model_" + std::string(to_string(*model.type)) + ".json" : "model.json";
}

ordered_json dims_to_json(const Dims& d) {
  return {{"words", d.words},           {"chars", d.chars},       {"labels", d.labels},
          {"word_dim", d.word_dim},     {"char_dim", d.char_dim}, {"char_hidden", d.char_hidden},
          {"word_hidden", d.word_hidden}};
}

Dims dims_from_json(const json& j) {
  Dims d;
  auto get = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_unsigned() || j.at(key).get<std::size_t>() == 0)
      throw ModelError(std::string("model dims.") + key + " must be a positive integer");
    return j.at(key).get<std::size_t>();
  };
  d.words = get("words");
  d.chars = get("chars");
  d.labels = get("labels");
  d.word_dim = get("word_dim");
  d.char_dim = get("char_dim");
  d.char_hidden = get("char_hidden");
  d.word_hidden = get("word_hidden");
  return d;
}

std::vector<EntityType> parse_types(const json& j, const char* what) {
  if (!j.is_array()) throw ModelError(std::string(what) + " must be an array of entity types");
  std::vector<EntityType> out;
  for (const auto& item : j) {
    auto t = item.is_string() ? try_parse_entity_type(item.get<std::string>()) : std::nullopt;
    if (!t) throw ModelError(std::string(what) + " holds an unknown entity type " + item.dump());
    out.push_back(*t);
  }
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::bag ? "bag" : "monolithic"; }

Mode parse_mode(std::string_view text) {
  if (text == "bag") return Mode::bag;
  if (text == "monolithic") return Mode::monolithic;
  throw InvalidArgument("unknown training mode '" + std::string(text) + "' (expected bag or monolithic)");
}

void TaggerModel::check() const {
  params.check_consistent();
  const Dims d = params.dims();
  if (d.words != vocab.words.size()) throw ModelError("word embedding rows do not match the word vocabulary");
  if (d.chars != vocab.chars.size()) throw ModelError("char embedding rows do not match the char vocabulary");
  if (d.labels != vocab.labels.size()) throw ModelError("projection rows do not match the label set");
  if (type && vocab.labels.types() != std::vector<EntityType>{*type})
    throw ModelError("model for '" + std::string(to_string(*type)) + "' carries a different label set");
}

void NeuralTaggerBundle::check() const {
  if (mode == Mode::monolithic) {
    if (models.size() != 1 || models.front().type) throw ModelError("monolithic bundle must hold one joint model");
    if (models.front().vocab.labels.types() != types) throw ModelError("joint model label set differs from bundle types");
  } else {
    if (models.size() != types.size()) throw ModelError("bag bundle must hold exactly one model per type");
    for (std::size_t i = 0; i < types.size(); ++i)
      if (models[i].type != types[i])
        throw ModelError("bag bundle model " + std::to_string(i) + " is not for '" + std::string(to_string(types[i])) +
                         "'");
  }
  for (const auto& m : models) m.check();
}

std::vector<TypedSpan> tag_sentence(const Sentence& sentence, const TaggerModel& model) {
  if (sentence.tokens.empty()) return {};
  const auto scores = score_sentence(encode_inputs(sentence, model.vocab), model.params);
  const auto path = viterbi_decode(scores.emissions, model.params.transitions, model.vocab.labels.transition_mask());
  std::vector<BioLabel> labels;
  labels.reserve(path.labels.size());
  for (auto i : path.labels) labels.push_back(model.vocab.labels.label(i));
  return bio_decode(labels, true);
}

std::vector<EntityMention> merge_bag_predictions(std::span<const std::vector<EntityMention>> per_type,
                                                 std::span<const EntityType> priority) {
  auto rank = [&](EntityType t) {
    auto it = std::find(priority.begin(), priority.end(), t);
    return it != priority.end() ? static_cast<std::size_t>(it - priority.begin())
                                : priority.size() + index_of(t);
  };
  std::vector<EntityMention> all;
  for (const auto& list : per_type) all.insert(all.end(), list.begin(), list.end());
  std::stable_sort(all.begin(), all.end(), [&](const EntityMention& a, const EntityMention& b) {
    if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
    if (a.sentence != b.sentence) return a.sentence < b.sentence;
    if (a.span.start != b.span.start) return a.span.start < b.span.start;
    return rank(a.type) < rank(b.type);
  });
  std::vector<EntityMention> kept;
  for (const auto& m : all) {
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const EntityMention& k) {
      return k.sentence == m.sentence && k.span.overlaps(m.span);
    });
    if (!clash) kept.push_back(m);
  }
  sort_mentions(kept);
  return kept;
}

void predict_neural(Document& doc, const NeuralTaggerBundle& bundle) {
  std::vector<EntityMention> result;
  for (const auto& sent : doc.sentences) {
    std::vector<std::vector<EntityMention>> per_model;
    for (const auto& model : bundle.models) {
      const auto spans = tag_sentence(sent, model);
      per_model.push_back(to_mentions(spans, sent.index));
    }
    auto merged = bundle.mode == Mode::bag ? merge_bag_predictions(per_model, bundle.priority)
                                           : std::move(per_model.front());
    result.insert(result.end(), merged.begin(), merged.end());
  }
  set_annotations(doc, kSource, std::move(result));
}

ordered_json model_to_json(const TaggerModel& model, Mode mode) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["mode"] = to_string(mode);
  j["entity_type"] = model.type ? ordered_json(to_string(*model.type)) : ordered_json(nullptr);
  ordered_json types = ordered_json::array();
  for (auto t : model.vocab.labels.types()) types.push_back(to_string(t));
  j["vocab"] = {{"words", model.vocab.words.items()},
                {"chars", model.vocab.chars.items()},
                {"types", types},
                {"labels", model.vocab.labels.names()}};
  j["dims"] = dims_to_json(model.params.dims());
  ordered_json weights = ordered_json::object();
  model.params.for_each([&](const std::string& name, Eigen::Map<const Matrix> m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    weights[name] = flat;
  });
  j["weights"] = std::move(weights);
  return j;
}

TaggerModel model_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ModelError("model file must hold a JSON object");
    if (j.value("format_version", 0) != kFormatVersion)
      throw ModelError("unsupported model format_version (expected " + std::to_string(kFormatVersion) + ")");
    TaggerModel model;
    const auto& et = j.at("entity_type");
    if (!et.is_null()) model.type = parse_types(json::array({et}), "entity_type").front();

    const auto& v = j.at("vocab");
    model.vocab.words = Vocab::from_items(v.at("words").get<std::vector<std::string>>());
    model.vocab.chars = Vocab::from_items(v.at("chars").get<std::vector<std::string>>());
    model.vocab.labels = LabelSet(parse_types(v.at("types"), "vocab.types"));
    if (v.at("labels").get<std::vector<std::string>>() != model.vocab.labels.names())
      throw ModelError("vocab.labels does not match vocab.types");

    model.params = TaggerParams::zeros(dims_from_json(j.at("dims")));
    const auto& weights = j.at("weights");
    model.params.for_each([&](const std::string& name, Eigen::Map<Matrix> m) {
      if (!weights.contains(name)) throw ModelError("model lacks weight tensor '" + name + "'");
      const auto flat = weights.at(name).get<std::vector<double>>();
      if (flat.size() != static_cast<std::size_t>(m.size()))
        throw ModelError("weight tensor '" + name + "' has " + std::to_string(flat.size()) + " values, expected " +
                         std::to_string(m.size()));
      std::size_t k = 0;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = flat[k++];
    });
    if (!model.params.all_finite()) throw ModelError("model holds non-finite weights");
    model.check();
    return model;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model: ") + e.what());
  }
}

void save_bundle(const NeuralTaggerBundle& bundle, const std::filesystem::path& dir) {
  bundle.check();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create model directory " + dir.string() + ": " + ec.message());

  ordered_json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["mode"] = to_string(bundle.mode);
  ordered_json types = ordered_json::array(), priority = ordered_json::array(), files = ordered_json::array();
  for (auto t : bundle.types) types.push_back(to_string(t));
  for (auto t : bundle.priority) priority.push_back(to_string(t));
  for (const auto& model : bundle.models) {
    const auto name = model_file_name(model);
    files.push_back(name);
    std::ofstream out(dir / name);
    out << model_to_json(model, bundle.mode).dump() << '\n';
    if (!out) throw IoError("cannot write " + (dir / name).string());
  }
  manifest["types"] = types;
  manifest["priority"] = priority;
  manifest["files"] = files;
  std::ofstream out(dir / "bundle.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + (dir / "bundle.json").string());
}

NeuralTaggerBundle load_bundle(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "bundle.json";
  if (!std::filesystem::exists(manifest_path)) throw IoError("no bundle.json in " + dir.string());
  const json manifest = read_json_file(manifest_path);
  try {
    if (manifest.value("format_version", 0) != kFormatVersion) throw ModelError("unsupported bundle format_version");
    NeuralTaggerBundle bundle;
    bundle.mode = parse_mode(manifest.at("mode").get<std::string>());
    bundle.types = parse_types(manifest.at("types"), "types");
    bundle.priority = parse_types(manifest.at("priority"), "priority");
    for (const auto& file : manifest.at("files")) {
      const auto path = dir / file.get<std::string>();
      if (!std::filesystem::exists(path)) throw ModelError("missing model file " + path.string());
      auto model = model_from_json(read_json_file(path));
      bundle.models.push_back(std::move(model));
    }
    if (bundle.mode == Mode::bag) {
      for (auto t : bundle.types) {
        bool found = std::any_of(bundle.models.begin(), bundle.models.end(),
                                 [&](const TaggerModel& m) { return m.type == t; });
        if (!found) throw ModelError("bundle has no model for type '" + std::string(to_string(t)) + "'");
      }
    }
    bundle.check();
    return bundle;
  } catch (const json::exception& e) {
    throw ModelError("malformed bundle manifest: " + std::string(e.what()));
  } catch (const InvalidArgument& e) {
    throw ModelError(e.what());
  }
}

}  // namespace radner::neural
