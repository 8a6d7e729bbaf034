#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radner/core/bio.hpp"
#include "radner/core/document.hpp"
#include "radner/neural/network.hpp"
#include "radner/neural/vocab.hpp"

namespace radner::neural {

inline constexpr const char* kSource = "neural";
inline constexpr int kFormatVersion = 1;

enum class Mode { bag, monolithic };

std::string_view to_string(Mode mode);
// Throws InvalidArgument for anything but "bag" or "monolithic".
Mode parse_mode(std::string_view text);

// One trained tagger; `type` is set for per-type models of a bag.
struct TaggerModel {
  std::optional<EntityType> type;
  VocabMaps vocab;
  TaggerParams params;

  // Throws ModelError when the vocabularies and parameters disagree.
  void check() const;
};

struct NeuralTaggerBundle {
  Mode mode = Mode::bag;
  std::vector<EntityType> types;
  std::vector<EntityType> priority;  // merge order for equal spans
  std::vector<TaggerModel> models;   // one per type (bag) or exactly one (monolithic)

  void check() const;
};

// Viterbi decoding under the BIO legality mask, then repaired BIO decoding.
std::vector<TypedSpan> tag_sentence(const Sentence& sentence, const TaggerModel& model);

// Resolves overlaps between per-type predictions: longer span first, then the
// type ranked earlier in `priority`, then the leftmost span. Types missing from
// `priority` rank after all listed ones. Result is sorted.
std::vector<EntityMention> merge_bag_predictions(std::span<const std::vector<EntityMention>> per_type,
                                                 std::span<const EntityType> priority);

// Stores predictions under source "neural", replacing earlier ones.
void predict_neural(Document& doc, const NeuralTaggerBundle& bundle);

// Model files: {"format_version", "mode", "entity_type", "vocab", "dims", "weights"}
// where every weight tensor is a flat row-major array.
nlohmann::ordered_json model_to_json(const TaggerModel& model, Mode mode);
TaggerModel model_from_json(const nlohmann::json& j);

// A bundle is a directory holding bundle.json plus one model file per model.
// Missing or inconsistent model files raise ModelError.
void save_bundle(const NeuralTaggerBundle& bundle, const std::filesystem::path& dir);
NeuralTaggerBundle load_bundle(const std::filesystem::path& dir);

}  // namespace radner::neural
