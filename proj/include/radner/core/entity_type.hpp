#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace radner {

// The closed inventory of annotated entity types. Enumeration order is
// significant: it is used for tie-breaking and for report row ordering.
enum class EntityType : std::uint8_t {
  ischaemic_stroke,
  haemorrhagic_stroke,
  stroke,
  glioma_tumour,
  meningioma_tumour,
  metastasis_tumour,
  tumour,
  subdural_haematoma,
  small_vessel_disease,
  atrophy,
  microhaemorrhage,
  subarachnoid_haemorrhage,
  haemorrhagic_transformation,
  loc_cortical,
  loc_deep,
  time_old,
  time_recent,
};

inline constexpr std::size_t kNumEntityTypes = 17;

const std::array<EntityType, kNumEntityTypes>& all_entity_types();

std::string_view to_string(EntityType type);

// Returns nullopt for unknown names.
std::optional<EntityType> try_parse_entity_type(std::string_view name);

// Throws FormatError for unknown names.
EntityType parse_entity_type(std::string_view name);

constexpr std::size_t index_of(EntityType type) { return static_cast<std::size_t>(type); }

}  // namespace radner
