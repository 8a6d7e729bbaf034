#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "radner/core/document.hpp"

namespace radner::eval {

// One table cell group: raw counts plus derived scores. Counts are zero in
// averaged reports, where only the scores are meaningful.
struct Cell {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // False when the type occurs neither in the reference nor in the predictions.
  bool present = false;

  bool operator==(const Cell&) const = default;
};

// Zero denominators yield 0.
double f1_score(double precision, double recall);
Cell make_cell(std::size_t tp, std::size_t fp, std::size_t fn);

struct EvalReport {
  std::string corpus;
  std::string gold;
  std::string system;
  bool averaged = false;
  std::size_t runs = 1;
  std::array<Cell, kNumEntityTypes> per_type{};
  Cell all;  // micro-average over summed counts

  const Cell& row(EntityType t) const { return per_type[index_of(t)]; }
  bool operator==(const EvalReport&) const = default;
};

// Strict matching: a prediction is correct iff a reference mention has the same
// sentence, token span and type. Documents lacking `gold` are skipped; documents
// lacking `system` count as having no predictions. Throws InvalidArgument when
// the corpus is non-empty but no document carries `gold` or `system`.
EvalReport score_strict(const Corpus& corpus, const std::string& gold, const std::string& system);

// Cell-wise arithmetic mean of precision, recall and F1 over k >= 1 runs.
EvalReport aggregate_runs(std::span<const EvalReport> runs);

inline constexpr std::size_t kDefaultRuns = 5;

// Agreement of annotator `b` against annotator `a` as reference, over the
// documents annotated by both.
EvalReport compute_iaa(const Corpus& corpus, const std::string& a, const std::string& b);

nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

enum class TableFormat { text, tsv };

// Renders the per-type comparison: one row per entity type in inventory order
// plus "All"; one P/R/F1 group per report (and a trailing "IAA" group when
// given). Cells of absent types show "-"; with several systems the best F1 of
// each row is marked with '*'. Throws InvalidArgument if the reports disagree
// on corpus or gold source.
std::string compare_systems(std::span<const EvalReport> reports, const EvalReport* iaa = nullptr,
                            TableFormat format = TableFormat::text);

// Two-decimal rendering used in tables.
std::string format_score(double value);

}  // namespace radner::eval
