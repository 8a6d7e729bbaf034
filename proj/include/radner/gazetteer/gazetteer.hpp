#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "radner/core/document.hpp"
#include "radner/core/phrase_trie.hpp"

namespace radner::gazetteer {

inline constexpr const char* kSource = "gazetteer";

// Lowercased token phrases mapped to sorted, de-duplicated concept ids.
class ConceptDictionary {
 public:
  // Lines are `phrase<TAB>id[,id...]`; '#' starts a comment. Repeated phrases merge their ids.
  static ConceptDictionary load(const std::filesystem::path& path);

  // Throws InvalidArgument on an empty phrase or id list.
  void add(const std::vector<std::string>& phrase, const std::vector<std::string>& ids);

  const PhraseTrie<std::vector<std::string>>& trie() const { return trie_; }
  std::vector<std::string> concept_ids() const;
  std::size_t size() const { return trie_.size(); }

 private:
  PhraseTrie<std::vector<std::string>> trie_;
  std::vector<std::vector<std::string>> phrases_;
};

// Concept id -> entity types in fallback order.
class ConceptMap {
 public:
  // Lines are `id<TAB>type[,type...]`.
  static ConceptMap load(const std::filesystem::path& path);

  // Throws InvalidArgument for an empty id, an empty or repeated type list, or a duplicate id.
  void add(const std::string& id, std::vector<EntityType> types);
  // Throws InvalidArgument for an unknown id.
  const std::vector<EntityType>& types(const std::string& id) const;
  bool contains(const std::string& id) const { return map_.contains(id); }
  bool is_ambiguous(const std::string& id) const { return types(id).size() > 1; }
  const std::map<std::string, std::vector<EntityType>>& entries() const { return map_; }

 private:
  std::map<std::string, std::vector<EntityType>> map_;
};

struct ConceptResources {
  ConceptDictionary dictionary;
  ConceptMap map;

  // Throws FormatError when a dictionary id is missing from the map.
  static ConceptResources load(const std::filesystem::path& dictionary_path, const std::filesystem::path& map_path);
  // dictionary.tsv and concept_map.tsv inside `dir`.
  static ConceptResources load_dir(const std::filesystem::path& dir);
  static ConceptResources load_stock();
};

struct ConceptMatch {
  Span span;
  std::vector<std::string> concepts;
};

// Case-insensitive leftmost-longest dictionary matching.
std::vector<ConceptMatch> match_concepts(const Sentence& sentence, const ConceptDictionary& dictionary);

inline constexpr std::size_t kDefaultWindow = 5;

// Sorted distinct lowercased words within `window` tokens on either side of `span`.
std::vector<std::string> context_words(const Sentence& sentence, Span span, std::size_t window);

// Multinomial logistic regression over binary context-word features.
struct ConceptClassifier {
  std::vector<EntityType> classes;
  std::vector<std::string> features;  // sorted
  Eigen::MatrixXd weights;            // classes x features
  Eigen::VectorXd bias;
  bool trained = false;

  // Indices of the known features among `words`.
  std::vector<std::size_t> encode(std::span<const std::string> words) const;
  Eigen::VectorXd probabilities(std::span<const std::string> words) const;
};

struct DisambiguationModel {
  std::size_t window = kDefaultWindow;
  std::map<std::string, ConceptClassifier> concepts;  // ambiguous concepts only
};

struct DisambiguatorConfig {
  std::size_t window = kDefaultWindow;
  std::size_t epochs = 200;
  double learning_rate = 1.0;
  double l2 = 1e-3;
  std::string gold_source = "gold";
};

DisambiguatorConfig disambiguator_config_from_json(const nlohmann::json& j);

struct TrainingInstance {
  std::vector<std::size_t> features;  // active feature indices
  std::size_t label = 0;
};

// Mean cross-entropy plus (l2/2)|W|^2 and its gradient.
struct LogisticLoss {
  double value = 0.0;
  Eigen::MatrixXd d_weights;
  Eigen::VectorXd d_bias;
};
LogisticLoss logistic_loss(const ConceptClassifier& clf, std::span<const TrainingInstance> data, double l2);

// Full-batch gradient descent from zero weights. The step is capped by the
// inverse smoothness bound of the loss, so the loss never increases. Returns
// the loss before the first step and after each epoch.
std::vector<double> fit_classifier(ConceptClassifier& clf, std::span<const TrainingInstance> data,
                                   const DisambiguatorConfig& config);

// Collects, for every ambiguous concept, the matches whose span equals a gold
// mention of one of the concept's types. Concepts without instances stay untrained.
DisambiguationModel train_disambiguator(const Corpus& corpus, const ConceptResources& resources,
                                        const DisambiguatorConfig& config);

struct Resolution {
  EntityType type;
  double confidence = 0.0;  // 1 for unambiguous concepts, 0 for untrained ambiguous ones
};

// Throws InvalidArgument for a concept absent from the map, ModelError when the
// model's classes disagree with the map.
Resolution disambiguate(const std::string& concept_id, std::span<const std::string> context, const ConceptMap& map,
                        const DisambiguationModel& model);

// Annotates every sentence under source "gazetteer". A span matched by several
// concepts takes the most confident resolution; ties go to the first id.
void annotate_gazetteer(Document& doc, const ConceptResources& resources, const DisambiguationModel& model);

nlohmann::ordered_json to_json(const DisambiguationModel& model);
// Throws ModelError on a malformed or inconsistent model.
DisambiguationModel model_from_json(const nlohmann::json& j);
void save_model(const DisambiguationModel& model, const std::filesystem::path& path);
DisambiguationModel load_model(const std::filesystem::path& path);

}  // namespace radner::gazetteer
