#include "radner/ruler/ruler.hpp"

namespace radner::ruler {

void annotate_rule_based(Document& doc, const RuleSet& ruleset, const textproc::Pipeline& pipeline,
                         std::vector<std::string>* diagnostics) {
  if (doc.sentences.empty() && !doc.raw_text.empty()) pipeline.process(doc);

  std::vector<EntityMention> mentions;
  for (const auto& sentence : doc.sentences) {
    auto outcome = apply_rules(sentence, apply_lexicon(sentence, ruleset.lexicon), ruleset.rules);
    mentions.insert(mentions.end(), outcome.mentions.begin(), outcome.mentions.end());
    if (diagnostics)
      for (auto& d : outcome.diagnostics)
        diagnostics->push_back(doc.id + " sentence " + std::to_string(sentence.index) + ": " + d);
  }
  set_annotations(doc, std::string(kSource), std::move(mentions));
}

}  // namespace radner::ruler
