#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "radner/core/error.hpp"
#include "radner/gazetteer/gazetteer.hpp"

namespace radner::gazetteer {
namespace {

using json = nlohmann::json;

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

Eigen::VectorXd logits(const ConceptClassifier& clf, std::span<const std::size_t> features) {
  Eigen::VectorXd z = clf.bias;
  for (auto f : features) z += clf.weights.col(static_cast<Eigen::Index>(f));
  return z;
}

}  // namespace

std::vector<std::size_t> ConceptClassifier::encode(std::span<const std::string> words) const {
  std::vector<std::size_t> out;
  for (const auto& w : words) {
    auto it = std::lower_bound(features.begin(), features.end(), w);
    if (it != features.end() && *it == w) out.push_back(static_cast<std::size_t>(it - features.begin()));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Eigen::VectorXd ConceptClassifier::probabilities(std::span<const std::string> words) const {
  return softmax(logits(*this, encode(words)));
}

DisambiguatorConfig disambiguator_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("disambiguator config must be a JSON object");
  DisambiguatorConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "window" || key == "epochs") {
      if (!v.is_number_unsigned()) throw InvalidArgument("config '" + key + "' must be a non-negative integer");
      (key == "window" ? c.window : c.epochs) = v.get<std::size_t>();
    } else if (key == "learning_rate" || key == "l2") {
      if (!v.is_number() || v.get<double>() < 0.0) throw InvalidArgument("config '" + key + "' must be a non-negative number");
      (key == "l2" ? c.l2 : c.learning_rate) = v.get<double>();
    } else if (key == "gold_source") {
      if (!v.is_string()) throw InvalidArgument("config 'gold_source' must be a string");
      c.gold_source = v.get<std::string>();
    } else {
      throw InvalidArgument("unknown disambiguator config key '" + key + "'");
    }
  }
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  return c;
}

LogisticLoss logistic_loss(const ConceptClassifier& clf, std::span<const TrainingInstance> data, double l2) {
  LogisticLoss out;
  out.d_weights = Eigen::MatrixXd::Zero(clf.weights.rows(), clf.weights.cols());
  out.d_bias = Eigen::VectorXd::Zero(clf.bias.size());
  for (const auto& inst : data) {
    Eigen::VectorXd z = logits(clf, inst.features);
    const double m = z.maxCoeff();
    const double lse = m + std::log((z.array() - m).exp().sum());
    out.value += lse - z(static_cast<Eigen::Index>(inst.label));
    Eigen::VectorXd dz = (z.array() - lse).exp().matrix();
    dz(static_cast<Eigen::Index>(inst.label)) -= 1.0;
    for (auto f : inst.features) out.d_weights.col(static_cast<Eigen::Index>(f)) += dz;
    out.d_bias += dz;
  }
  if (!data.empty()) {
    const double n = static_cast<double>(data.size());
    out.value /= n;
    out.d_weights /= n;
    out.d_bias /= n;
  }
  out.value += 0.5 * l2 * clf.weights.squaredNorm();
  out.d_weights += l2 * clf.weights;
  return out;
}

std::vector<double> fit_classifier(ConceptClassifier& clf, std::span<const TrainingInstance> data,
                                   const DisambiguatorConfig& config) {
  const auto k = static_cast<Eigen::Index>(clf.classes.size());
  const auto f = static_cast<Eigen::Index>(clf.features.size());
  clf.weights = Eigen::MatrixXd::Zero(k, f);
  clf.bias = Eigen::VectorXd::Zero(k);
  clf.trained = !data.empty();
  if (data.empty()) return {};

  std::size_t max_active = 0;
  for (const auto& inst : data) max_active = std::max(max_active, inst.features.size());
  const double smoothness = 0.5 * static_cast<double>(max_active + 1) + config.l2;
  const double step = std::min(config.learning_rate, 1.0 / smoothness);

  std::vector<double> history;
  auto loss = logistic_loss(clf, data, config.l2);
  history.push_back(loss.value);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    clf.weights -= step * loss.d_weights;
    clf.bias -= step * loss.d_bias;
    loss = logistic_loss(clf, data, config.l2);
    history.push_back(loss.value);
  }
  return history;
}

DisambiguationModel train_disambiguator(const Corpus& corpus, const ConceptResources& resources,
                                        const DisambiguatorConfig& config) {
  struct Raw {
    std::vector<std::string> context;
    std::size_t label;
  };
  std::map<std::string, std::vector<Raw>> raw;
  for (const auto& [id, types] : resources.map.entries())
    if (types.size() > 1) raw[id];

  for (const auto& doc : corpus.documents) {
    if (!doc.has_source(config.gold_source)) continue;
    for (const auto& sent : doc.sentences) {
      const auto gold = doc.mentions_in(config.gold_source, sent.index);
      for (const auto& match : match_concepts(sent, resources.dictionary)) {
        std::vector<std::string> context;
        for (const auto& id : match.concepts) {
          auto slot = raw.find(id);
          if (slot == raw.end()) continue;
          const auto& types = resources.map.types(id);
          for (const auto& g : gold) {
            if (g.span != match.span) continue;
            auto it = std::find(types.begin(), types.end(), g.type);
            if (it == types.end()) continue;
            if (context.empty()) context = context_words(sent, match.span, config.window);
            slot->second.push_back({context, static_cast<std::size_t>(it - types.begin())});
          }
        }
      }
    }
  }

  DisambiguationModel model;
  model.window = config.window;
  for (auto& [id, instances] : raw) {
    ConceptClassifier clf;
    clf.classes = resources.map.types(id);
    std::set<std::string> vocab;
    for (const auto& r : instances) vocab.insert(r.context.begin(), r.context.end());
    clf.features.assign(vocab.begin(), vocab.end());
    std::vector<TrainingInstance> data;
    for (const auto& r : instances) data.push_back({clf.encode(r.context), r.label});
    fit_classifier(clf, data, config);
    model.concepts.emplace(id, std::move(clf));
  }
  return model;
}

Resolution disambiguate(const std::string& concept_id, std::span<const std::string> context, const ConceptMap& map,
                        const DisambiguationModel& model) {
  const auto& types = map.types(concept_id);
  if (types.size() == 1) return {types.front(), 1.0};
  auto it = model.concepts.find(concept_id);
  if (it == model.concepts.end() || !it->second.trained) return {types.front(), 0.0};
  const auto& clf = it->second;
  if (clf.classes != types)
    throw ModelError("disambiguator classes for '" + concept_id + "' differ from the concept map");
  const Eigen::VectorXd p = clf.probabilities(context);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i)
    if (p(i) > p(best)) best = i;
  return {types[static_cast<std::size_t>(best)], p(best)};
}

nlohmann::ordered_json to_json(const DisambiguationModel& model) {
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["window"] = model.window;
  auto concepts = nlohmann::ordered_json::object();
  for (const auto& [id, clf] : model.concepts) {
    nlohmann::ordered_json c;
    auto classes = nlohmann::ordered_json::array();
    for (auto t : clf.classes) classes.push_back(to_string(t));
    c["classes"] = classes;
    c["trained"] = clf.trained;
    c["features"] = clf.features;
    auto weights = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < clf.weights.rows(); ++r) {
      std::vector<double> row(clf.weights.row(r).begin(), clf.weights.row(r).end());
      weights.push_back(row);
    }
    c["weights"] = weights;
    c["bias"] = std::vector<double>(clf.bias.begin(), clf.bias.end());
    concepts[id] = c;
  }
  j["concepts"] = concepts;
  return j;
}

DisambiguationModel model_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format_version", 0) != 1)
      throw ModelError("unsupported disambiguator model format_version");
    DisambiguationModel model;
    model.window = j.at("window").get<std::size_t>();
    for (const auto& [id, c] : j.at("concepts").items()) {
      ConceptClassifier clf;
      for (const auto& name : c.at("classes")) {
        auto t = try_parse_entity_type(name.get<std::string>());
        if (!t) throw ModelError("unknown entity type in disambiguator model: " + name.dump());
        clf.classes.push_back(*t);
      }
      clf.trained = c.at("trained").get<bool>();
      clf.features = c.at("features").get<std::vector<std::string>>();
      if (!std::is_sorted(clf.features.begin(), clf.features.end()))
        throw ModelError("features of '" + id + "' are not sorted");
      const auto rows = c.at("weights").get<std::vector<std::vector<double>>>();
      const auto bias = c.at("bias").get<std::vector<double>>();
      const auto k = clf.classes.size(), f = clf.features.size();
      if (rows.size() != k || bias.size() != k) throw ModelError("weights of '" + id + "' do not match its classes");
      clf.weights.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f));
      clf.bias.resize(static_cast<Eigen::Index>(k));
      for (std::size_t r = 0; r < k; ++r) {
        if (rows[r].size() != f) throw ModelError("weights of '" + id + "' do not match its features");
        for (std::size_t col = 0; col < f; ++col)
          clf.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) = rows[r][col];
        clf.bias(static_cast<Eigen::Index>(r)) = bias[r];
      }
      if (!clf.weights.allFinite() || !clf.bias.allFinite()) throw ModelError("non-finite weights for '" + id + "'");
      model.concepts.emplace(id, std::move(clf));
    }
    return model;
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed disambiguator model: ") + e.what());
  }
}

void save_model(const DisambiguationModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  out << to_json(model).dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

DisambiguationModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open disambiguator model " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace radner::gazetteer
