#include "radner/neural/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "radner/core/error.hpp"
#include "radner/core/random.hpp"
#include "radner/core/text_util.hpp"
#include "radner/eval/eval.hpp"

namespace radner::neural {
namespace {

using json = nlohmann::json;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Example {
  std::vector<TokenFeatures> features;
  std::vector<std::size_t> gold;
};

std::vector<EntityType> parse_type_list(const json& j, const char* key) {
  if (!j.is_array()) throw InvalidArgument(std::string("config '") + key + "' must be an array of entity types");
  std::vector<EntityType> out;
  for (const auto& item : j) {
    if (!item.is_string()) throw InvalidArgument(std::string("config '") + key + "' must hold strings");
    auto t = try_parse_entity_type(item.get<std::string>());
    if (!t) throw InvalidArgument("unknown entity type '" + item.get<std::string>() + "' in config '" + key + "'");
    out.push_back(*t);
  }
  return out;
}

class Adam {
 public:
  Adam(const TaggerParams& params, double lr) : m_(params.zeros_like()), v_(params.zeros_like()), lr_(lr) {}

  void step(TaggerParams& params, TaggerParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    std::vector<Eigen::Map<Matrix>> p, g, m, v;
    params.for_each([&](const std::string&, Eigen::Map<Matrix> x) { p.push_back(x); });
    grad.for_each([&](const std::string&, Eigen::Map<Matrix> x) { g.push_back(x); });
    m_.for_each([&](const std::string&, Eigen::Map<Matrix> x) { m.push_back(x); });
    v_.for_each([&](const std::string&, Eigen::Map<Matrix> x) { v.push_back(x); });
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i].cwiseProduct(g[i]);
      p[i].array() -= lr_ * (m[i].array() / c1) / ((v[i].array() / c2).sqrt() + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  TaggerParams m_, v_;
  double lr_;
  std::size_t t_ = 0;
};

void clip_gradient(TaggerParams& grad, double max_norm) {
  double sq = 0.0;
  grad.for_each([&](const std::string&, Eigen::Map<Matrix> g) { sq += g.squaredNorm(); });
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grad.for_each([&](const std::string&, Eigen::Map<Matrix> g) { g *= scale; });
  }
}

double dev_f1(const Corpus& dev, const TaggerModel& model, const std::string& gold_source, bool& has_gold) {
  std::size_t tp = 0, fp = 0, fn = 0;
  const auto& types = model.vocab.labels.types();
  has_gold = false;
  for (const auto& doc : dev.documents) {
    if (!doc.has_source(gold_source)) continue;
    for (const auto& sent : doc.sentences) {
      if (sent.tokens.empty()) continue;
      has_gold = true;
      std::set<std::tuple<EntityType, std::size_t, std::size_t>> gold;
      for (const auto& m : doc.mentions_in(gold_source, sent.index))
        if (std::find(types.begin(), types.end(), m.type) != types.end())
          gold.emplace(m.type, m.span.start, m.span.end);
      for (const auto& p : tag_sentence(sent, model)) {
        if (gold.erase({p.type, p.span.start, p.span.end}))
          ++tp;
        else
          ++fp;
      }
      fn += gold.size();
    }
  }
  return eval::make_cell(tp, fp, fn).f1;
}

}  // namespace

void TrainConfig::validate() const {
  for (auto [value, name] : {std::pair{word_dim, "word_dim"}, std::pair{char_dim, "char_dim"},
                             std::pair{char_hidden, "char_hidden"}, std::pair{word_hidden, "word_hidden"},
                             std::pair{epochs, "epochs"}})
    if (value == 0) throw InvalidArgument(std::string(name) + " must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning_rate must be positive");
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) throw InvalidArgument("clip_norm must be positive");
  if (!seed) throw InvalidArgument("a training seed is required");
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("training config must be a JSON object");
  TrainConfig c;
  auto size = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) throw InvalidArgument("config '" + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
  };
  auto real = [](const json& v, const std::string& key) {
    if (!v.is_number()) throw InvalidArgument("config '" + key + "' must be a number");
    return v.get<double>();
  };
  auto text = [](const json& v, const std::string& key) {
    if (!v.is_string()) throw InvalidArgument("config '" + key + "' must be a string");
    return v.get<std::string>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "mode") c.mode = parse_mode(text(v, key));
    else if (key == "word_dim") c.word_dim = size(v, key);
    else if (key == "char_dim") c.char_dim = size(v, key);
    else if (key == "char_hidden") c.char_hidden = size(v, key);
    else if (key == "word_hidden") c.word_hidden = size(v, key);
    else if (key == "learning_rate") c.learning_rate = real(v, key);
    else if (key == "epochs") c.epochs = size(v, key);
    else if (key == "seed") c.seed = size(v, key);
    else if (key == "clip_norm") c.clip_norm = real(v, key);
    else if (key == "pretrained_embeddings") {
      if (!v.is_null()) c.pretrained_embeddings = text(v, key);
    } else if (key == "types") c.types = parse_type_list(v, "types");
    else if (key == "priority") c.priority = parse_type_list(v, "priority");
    else if (key == "gold_source") c.gold_source = text(v, key);
    else if (key == "threads") c.threads = size(v, key);
    else throw InvalidArgument("unknown training config key '" + key + "'");
  }
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return train_config_from_json(j);
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["word_dim"] = c.word_dim;
  j["char_dim"] = c.char_dim;
  j["char_hidden"] = c.char_hidden;
  j["word_hidden"] = c.word_hidden;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  j["clip_norm"] = c.clip_norm;
  j["pretrained_embeddings"] =
      c.pretrained_embeddings ? nlohmann::ordered_json(c.pretrained_embeddings->string()) : nlohmann::ordered_json(nullptr);
  auto types = [](const std::vector<EntityType>& ts) {
    auto a = nlohmann::ordered_json::array();
    for (auto t : ts) a.push_back(to_string(t));
    return a;
  };
  j["types"] = types(c.types);
  j["priority"] = types(c.priority);
  j["gold_source"] = c.gold_source;
  j["threads"] = c.threads;
  return j;
}

std::unordered_map<std::string, std::vector<double>> load_embeddings(const std::filesystem::path& path,
                                                                     std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  std::unordered_map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    auto fail = [&](const std::string& msg) {
      return FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + msg);
    };
    if (fields.size() - 1 != dim)
      throw fail("expected " + std::to_string(dim) + " values, found " + std::to_string(fields.size() - 1));
    std::vector<double> vec;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::istringstream ss{std::string(fields[i])};
      double x;
      if (!(ss >> x) || !ss.eof() || !std::isfinite(x)) throw fail("bad value '" + std::string(fields[i]) + "'");
      vec.push_back(x);
    }
    out.emplace(to_lower(std::string(fields[0])), std::move(vec));
  }
  return out;
}

ModelTrainResult train_model(const Corpus& train, const Corpus& dev, std::vector<EntityType> types,
                             std::optional<EntityType> bag_type, const TrainConfig& config, std::uint64_t seed,
                             const TrainLogger& log) {
  config.validate();
  ModelTrainResult result;
  TaggerModel& model = result.model;
  model.type = bag_type;
  model.vocab = build_vocab(train, std::move(types));

  std::unordered_map<std::string, std::vector<double>> pretrained;
  if (config.pretrained_embeddings) {
    pretrained = load_embeddings(*config.pretrained_embeddings, config.word_dim);
    std::vector<std::string> extra;
    for (const auto& [word, vec] : pretrained)
      if (!model.vocab.words.contains(word)) extra.push_back(word);
    std::sort(extra.begin(), extra.end());
    for (const auto& w : extra) model.vocab.words.add(w);
  }

  Dims dims;
  dims.words = model.vocab.words.size();
  dims.chars = model.vocab.chars.size();
  dims.labels = model.vocab.labels.size();
  dims.word_dim = config.word_dim;
  dims.char_dim = config.char_dim;
  dims.char_hidden = config.char_hidden;
  dims.word_hidden = config.word_hidden;

  Rng rng(seed);
  model.params = TaggerParams::init(dims, rng);
  for (const auto& [word, vec] : pretrained)
    model.params.word_embedding.row(static_cast<Eigen::Index>(model.vocab.words.lookup(word))) =
        Eigen::Map<const Eigen::RowVectorXd>(vec.data(), static_cast<Eigen::Index>(vec.size()));

  std::vector<Example> examples;
  for (const auto& doc : train.documents) {
    if (!doc.has_source(config.gold_source)) continue;
    for (const auto& sent : doc.sentences) {
      if (sent.tokens.empty()) continue;
      examples.push_back({encode_inputs(sent, model.vocab), gold_labels(doc, sent, config.gold_source, model.vocab.labels)});
    }
  }
  if (examples.empty()) throw InvalidArgument("training corpus has no sentences with '" + config.gold_source + "' annotations");

  Adam adam(model.params, config.learning_rate);
  TaggerParams grad = model.params.zeros_like();
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TaggerParams best = model.params;
  double best_f1 = -1.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (auto idx : order) {
      grad.for_each([](const std::string&, Eigen::Map<Matrix> g) { g.setZero(); });
      total += sentence_loss(examples[idx].features, examples[idx].gold, model.params, &grad);
      clip_gradient(grad, config.clip_norm);
      adam.step(model.params, grad);
    }
    if (!model.params.all_finite()) throw ModelError("training diverged (non-finite parameters)");

    bool has_dev = false;
    const double f1 = dev_f1(dev, model, config.gold_source, has_dev);
    EpochLog entry{bag_type, epoch, total / static_cast<double>(examples.size()), f1};
    result.history.push_back(entry);
    if (log) log(entry);
    if (!has_dev || f1 > best_f1) {
      best_f1 = f1;
      best = model.params;
      result.best_epoch = epoch;
    }
  }
  model.params = std::move(best);
  result.best_dev_f1 = std::max(best_f1, 0.0);
  return result;
}

NeuralTaggerBundle train_tagger(const Corpus& train, const Corpus& dev, const TrainConfig& config,
                                const TrainLogger& log) {
  config.validate();
  NeuralTaggerBundle bundle;
  bundle.mode = config.mode;
  bundle.types = config.types;
  if (bundle.types.empty()) {
    std::set<EntityType> seen;
    for (const auto& doc : train.documents) {
      auto it = doc.annotations.find(config.gold_source);
      if (it == doc.annotations.end()) continue;
      for (const auto& m : it->second) seen.insert(m.type);
    }
    bundle.types.assign(seen.begin(), seen.end());
  } else {
    std::sort(bundle.types.begin(), bundle.types.end());
    if (std::adjacent_find(bundle.types.begin(), bundle.types.end()) != bundle.types.end())
      throw InvalidArgument("config 'types' lists a type twice");
  }
  if (bundle.types.empty()) throw InvalidArgument("training corpus has no '" + config.gold_source + "' mentions");

  bundle.priority = config.priority;
  for (auto t : all_entity_types())
    if (std::find(bundle.priority.begin(), bundle.priority.end(), t) == bundle.priority.end())
      bundle.priority.push_back(t);

  std::mutex log_mutex;
  TrainLogger safe_log;
  if (log)
    safe_log = [&](const EpochLog& e) {
      std::lock_guard lock(log_mutex);
      log(e);
    };

  if (config.mode == Mode::monolithic) {
    bundle.models.push_back(
        train_model(train, dev, bundle.types, std::nullopt, config, mix_seed(*config.seed, 0), safe_log).model);
    return bundle;
  }

  const std::size_t n = bundle.types.size();
  std::vector<std::optional<TaggerModel>> models(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const auto t = bundle.types[i];
        models[i] = train_model(train, dev, {t}, t, config, mix_seed(*config.seed, 1 + index_of(t)), safe_log).model;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& m : models) bundle.models.push_back(std::move(*m));
  return bundle;
}

}  // namespace radner::neural
