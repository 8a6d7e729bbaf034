#include <algorithm>

#include <fmt/format.h>

#include "radner/core/error.hpp"
#include "radner/eval/eval.hpp"

namespace radner::eval {
namespace {

constexpr std::size_t kLabelWidth = 27;  // length of the longest type name
constexpr std::size_t kGroupWidth = 15;

struct Group {
  std::string name;
  const EvalReport* report;
  bool rankable;
};

std::string rtrim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::string format_score(double value) { return fmt::format("{:.2f}", value); }

std::string compare_systems(std::span<const EvalReport> reports, const EvalReport* iaa, TableFormat format) {
  if (reports.empty()) throw InvalidArgument("no reports to compare");
  for (const auto& r : reports)
    if (r.corpus != reports.front().corpus || r.gold != reports.front().gold)
      throw InvalidArgument("report for '" + r.system + "' was computed on '" + r.corpus + "'/'" + r.gold +
                            "', expected '" + reports.front().corpus + "'/'" + reports.front().gold + "'");
  if (iaa && iaa->corpus != reports.front().corpus)
    throw InvalidArgument("IAA report was computed on a different corpus ('" + iaa->corpus + "')");

  std::vector<Group> groups;
  for (const auto& r : reports) groups.push_back({r.system, &r, true});
  if (iaa) groups.push_back({"IAA", iaa, false});
  const bool flag_best = reports.size() > 1;

  std::vector<std::pair<std::string, std::vector<const Cell*>>> rows;
  for (auto t : all_entity_types()) {
    std::vector<const Cell*> cells;
    for (const auto& g : groups) cells.push_back(&g.report->row(t));
    rows.emplace_back(std::string(to_string(t)), std::move(cells));
  }
  {
    std::vector<const Cell*> cells;
    for (const auto& g : groups) cells.push_back(&g.report->all);
    rows.emplace_back("All", std::move(cells));
  }

  std::string out;
  if (format == TableFormat::text) {
    std::string line = fmt::format("{:<{}}", "", kLabelWidth);
    for (const auto& g : groups) line += fmt::format(" | {:<{}}", g.name, kGroupWidth);
    out += rtrim(line) + '\n';
    line = fmt::format("{:<{}}", "Entity Type", kLabelWidth);
    for (std::size_t i = 0; i < groups.size(); ++i) line += fmt::format(" | {:>4} {:>4} {:>4} ", "P", "R", "F1");
    out += rtrim(line) + '\n';
  } else {
    out += "entity_type";
    for (const auto& g : groups) out += fmt::format("\t{0} P\t{0} R\t{0} F1", g.name);
    out += '\n';
  }

  for (const auto& [label, cells] : rows) {
    double best = -1.0;
    for (std::size_t i = 0; i < groups.size(); ++i)
      if (groups[i].rankable && cells[i]->present) best = std::max(best, cells[i]->f1);

    std::string line = format == TableFormat::text ? fmt::format("{:<{}}", label, kLabelWidth) : label;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const Cell& c = *cells[i];
      std::string p = "-", r = "-", f = "-";
      if (c.present) {
        p = format_score(c.precision);
        r = format_score(c.recall);
        f = format_score(c.f1);
      }
      const bool is_best = flag_best && groups[i].rankable && c.present && c.f1 == best;
      if (format == TableFormat::text)
        line += fmt::format(" | {:>4} {:>4} {:>4}{}", p, r, f, is_best ? '*' : ' ');
      else
        line += fmt::format("\t{}\t{}\t{}{}", p, r, f, is_best ? "*" : "");
    }
    out += (format == TableFormat::text ? rtrim(line) : line) + '\n';
  }
  return out;
}

}  // namespace radner::eval
