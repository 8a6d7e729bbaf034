#include "radner/gazetteer/gazetteer.hpp"

#include <optional>

namespace radner::gazetteer {

void annotate_gazetteer(Document& doc, const ConceptResources& resources, const DisambiguationModel& model) {
  std::vector<EntityMention> mentions;
  for (const auto& sent : doc.sentences) {
    for (const auto& match : match_concepts(sent, resources.dictionary)) {
      const auto context = context_words(sent, match.span, model.window);
      std::optional<Resolution> best;
      for (const auto& id : match.concepts) {
        auto r = disambiguate(id, context, resources.map, model);
        if (!best || r.confidence > best->confidence) best = r;
      }
      mentions.push_back({best->type, sent.index, match.span});
    }
  }
  set_annotations(doc, kSource, std::move(mentions));
}

}  // namespace radner::gazetteer
