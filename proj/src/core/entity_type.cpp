#include "radner/core/entity_type.hpp"

#include "radner/core/error.hpp"

namespace radner {
namespace {

constexpr std::array<std::string_view, kNumEntityTypes> kNames = {
    "ischaemic_stroke",
    "haemorrhagic_stroke",
    "stroke",
    "glioma_tumour",
    "meningioma_tumour",
    "metastasis_tumour",
    "tumour",
    "subdural_haematoma",
    "small_vessel_disease",
    "atrophy",
    "microhaemorrhage",
    "subarachnoid_haemorrhage",
    "haemorrhagic_transformation",
    "loc_cortical",
    "loc_deep",
    "time_old",
    "time_recent",
};

}  // namespace

const std::array<EntityType, kNumEntityTypes>& all_entity_types() {
  static const auto types = [] {
    std::array<EntityType, kNumEntityTypes> out{};
    for (std::size_t i = 0; i < kNumEntityTypes; ++i) out[i] = static_cast<EntityType>(i);
    return out;
  }();
  return types;
}

std::string_view to_string(EntityType type) { return kNames.at(index_of(type)); }

std::optional<EntityType> try_parse_entity_type(std::string_view name) {
  for (std::size_t i = 0; i < kNumEntityTypes; ++i)
    if (kNames[i] == name) return static_cast<EntityType>(i);
  return std::nullopt;
}

EntityType parse_entity_type(std::string_view name) {
  if (auto t = try_parse_entity_type(name)) return *t;
  throw FormatError("unknown entity type '" + std::string(name) + "'");
}

}  // namespace radner
