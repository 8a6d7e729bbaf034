#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "radner/core/document.hpp"
#include "radner/textproc/textproc.hpp"

namespace radner::datagen {

inline constexpr const char* kGoldSource = "gold";

// Reference per-type mention counts for a 364-report corpus, in inventory order.
inline constexpr std::array<std::size_t, kNumEntityTypes> kReferenceCounts = {
    697, 344, 60, 0, 4, 24, 297, 244, 427, 246, 12, 13, 5, 516, 524, 527, 392};
inline constexpr std::size_t kReferenceReports = 364;

// Reference counts scaled by reports / kReferenceReports, rounded half away from zero.
std::map<EntityType, std::size_t> default_targets(std::size_t reports);

// Templates are single sentences with `{type}` or `{type:pool}` slots. A slot
// draws its text from fillers["type"] or fillers["type:pool"] and becomes a
// gold mention of `type` covering exactly the filler's tokens.
struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t reports = kReferenceReports;
  std::map<EntityType, std::size_t> targets;  // empty: default_targets(reports)
  std::vector<std::string> templates;
  std::map<std::string, std::vector<std::string>> fillers;
  std::vector<std::string> distractors;
  std::vector<std::string> headers;    // imaging section headers, without the colon
  std::vector<std::string> preambles;  // clinical details lines; may be empty
  std::size_t min_distractors = 1;
  std::size_t max_distractors = 3;
  std::string corpus_name = "synthetic";

  std::map<EntityType, std::size_t> effective_targets() const;
  // Throws InvalidArgument on malformed templates, slots without fillers, or a
  // type with a nonzero target and no template.
  void validate() const;
};

// Unknown keys are errors.
GenConfig gen_config_from_json(const nlohmann::json& j);
GenConfig load_gen_config(const std::filesystem::path& path);
GenConfig load_stock_gen_config();

struct Slot {
  std::string key;  // "type" or "type:pool"
  EntityType type;
};

// Splits a template into literal text and slots; literal[i] precedes slots[i].
struct ParsedTemplate {
  std::vector<std::string> literals;  // slots.size() + 1 pieces
  std::vector<Slot> slots;
};
ParsedTemplate parse_template(const std::string& text);

// Draws templates until every target is met exactly, then lays the sentences
// out over the configured number of reports. Gold mentions go under "gold".
// Throws InvalidArgument when some remaining target fits no template.
Corpus generate_corpus(const GenConfig& config, const textproc::Pipeline& pipeline);

// Document-level seeded split into (dev, test), each keeping the input order.
// The dev part gets round(fraction * n) documents, at least one and at most n - 1.
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double dev_fraction, std::uint64_t seed);

}  // namespace radner::datagen
