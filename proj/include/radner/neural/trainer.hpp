#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "radner/core/document.hpp"
#include "radner/neural/bundle.hpp"

namespace radner::neural {

struct TrainConfig {
  Mode mode = Mode::bag;
  std::size_t word_dim = 64;
  std::size_t char_dim = 16;
  std::size_t char_hidden = 16;
  std::size_t word_hidden = 64;
  double learning_rate = 1e-3;
  std::size_t epochs = 40;
  std::optional<std::uint64_t> seed;
  double clip_norm = 5.0;
  std::optional<std::filesystem::path> pretrained_embeddings;
  std::vector<EntityType> types;     // empty: every type seen in the training gold
  std::vector<EntityType> priority;  // empty: inventory order
  std::string gold_source = "gold";
  std::size_t threads = 0;  // bag-mode worker threads; 0 = hardware concurrency

  // Throws InvalidArgument on non-positive sizes, a missing seed or a bad clip norm.
  void validate() const;
};

// Reads a JSON object of TrainConfig fields; unknown keys are errors.
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const TrainConfig& config);

struct EpochLog {
  std::optional<EntityType> type;
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_f1 = 0.0;
};
using TrainLogger = std::function<void(const EpochLog&)>;

// Plain-text `word v1 ... vd` vectors, keyed by lowercased word. Throws
// FormatError when a row does not have exactly `dim` finite values.
std::unordered_map<std::string, std::vector<double>> load_embeddings(const std::filesystem::path& path,
                                                                     std::size_t dim);

struct ModelTrainResult {
  TaggerModel model;
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
};

// Trains one tagger over `types` with Adam, one update per sentence, clipping
// the global gradient norm. Keeps the epoch with the best dev F1 (earliest on
// ties; the last epoch when `dev` has no gold sentences).
ModelTrainResult train_model(const Corpus& train, const Corpus& dev, std::vector<EntityType> types,
                             std::optional<EntityType> bag_type, const TrainConfig& config, std::uint64_t seed,
                             const TrainLogger& log = {});

// Throws InvalidArgument when the training corpus has no gold sentences.
NeuralTaggerBundle train_tagger(const Corpus& train, const Corpus& dev, const TrainConfig& config,
                                const TrainLogger& log = {});

}  // namespace radner::neural
