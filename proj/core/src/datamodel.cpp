#include "gcn/datamodel.hpp"

#include <cctype>

#include "gcn/text.hpp"

namespace gcn {

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::IntentDetection:
      return "intent";
    case TaskKind::SlotTagging:
      return "slot";
    case TaskKind::DialogueResponse:
      return "dialogue";
  }
  return "unknown";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "intent" || text == "IntentDetection" || text == "intent_detection")
    return TaskKind::IntentDetection;
  if (text == "slot" || text == "SlotTagging" || text == "slot_tagging") return TaskKind::SlotTagging;
  if (text == "dialogue" || text == "DialogueResponse" || text == "dialogue_response")
    return TaskKind::DialogueResponse;
  throw std::invalid_argument("unknown task kind '" + std::string(text) + "'");
}

void SeparatorSet::validate() const {
  const std::string* all[] = {&bos, &go, &eos};
  for (const auto* s : all) {
    if (s->empty()) throw std::invalid_argument("separator tokens must be non-empty");
    for (char c : *s) {
      if (std::isspace(static_cast<unsigned char>(c)))
        throw std::invalid_argument("separator '" + *s + "' contains whitespace");
    }
  }
  for (const auto* a : all) {
    for (const auto* b : all) {
      if (a == b) continue;
      if (b->find(*a) != std::string::npos)
        throw std::invalid_argument("separator '" + *a + "' occurs inside '" + *b + "'");
    }
  }
}

bool SeparatorSet::contains_separator(std::string_view text) const {
  return text.find(bos) != std::string_view::npos || text.find(go) != std::string_view::npos ||
         text.find(eos) != std::string_view::npos;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::EmptyUtterance:
      return "empty_utterance";
    case ViolationCode::EmptyLabel:
      return "empty_label";
    case ViolationCode::TagLengthMismatch:
      return "tag_length_mismatch";
    case ViolationCode::MalformedTag:
      return "malformed_tag";
    case ViolationCode::DanglingInside:
      return "dangling_inside";
    case ViolationCode::SeparatorInLabel:
      return "separator_in_label";
    case ViolationCode::SeparatorInUtterance:
      return "separator_in_utterance";
    case ViolationCode::TagsOnNonSlotTask:
      return "tags_on_non_slot_task";
  }
  return "unknown";
}

bool ValidationResult::has(ViolationCode code) const {
  for (const auto& v : violations) {
    if (v.code == code) return true;
  }
  return false;
}

namespace {

// Appends the IOB problems of `tags`; returns true when none were found.
bool scan_iob(const std::vector<std::string>& tags, std::vector<Violation>* out) {
  bool ok = true;
  std::string open;  // entity type of the span we are inside, empty when outside
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t == "O") {
      open.clear();
      continue;
    }
    const bool begin = t.rfind("B-", 0) == 0;
    const bool inside = t.rfind("I-", 0) == 0;
    if ((!begin && !inside) || t.size() == 2) {
      ok = false;
      if (out) out->push_back({ViolationCode::MalformedTag, "tag " + std::to_string(i) + " '" + t + "'"});
      open.clear();
      continue;
    }
    const std::string type = t.substr(2);
    if (inside && open != type) {
      ok = false;
      if (out) out->push_back({ViolationCode::DanglingInside, "tag " + std::to_string(i) + " '" + t + "'"});
    }
    open = type;
  }
  return ok;
}

}  // namespace

bool is_well_formed_iob(const std::vector<std::string>& tags) { return scan_iob(tags, nullptr); }

ValidationResult validate_example(const LabeledExample& e, const SeparatorSet& separators) {
  ValidationResult result;
  auto& v = result.violations;
  if (trim(e.utterance).empty()) v.push_back({ViolationCode::EmptyUtterance, "utterance is empty"});
  if (trim(e.label).empty() && e.task != TaskKind::SlotTagging)
    v.push_back({ViolationCode::EmptyLabel, "label is empty"});
  if (separators.contains_separator(e.label))
    v.push_back({ViolationCode::SeparatorInLabel, "label contains a reserved separator"});
  if (separators.contains_separator(e.utterance))
    v.push_back({ViolationCode::SeparatorInUtterance, "utterance contains a reserved separator"});
  if (e.iob_tags) {
    if (e.task != TaskKind::SlotTagging)
      v.push_back({ViolationCode::TagsOnNonSlotTask, "IOB tags on a non slot-tagging example"});
    const std::size_t tokens = tokenize(e.utterance).size();
    if (e.iob_tags->size() != tokens) {
      v.push_back({ViolationCode::TagLengthMismatch,
                   std::to_string(e.iob_tags->size()) + " tags for " + std::to_string(tokens) + " tokens"});
    }
    scan_iob(*e.iob_tags, &v);
  }
  return result;
}

void MetaConfig::validate() const {
  if (meta_iterations < 1) throw std::invalid_argument("meta_iterations must be >= 1");
  if (learner_iterations_per_meta < 0) throw std::invalid_argument("learner_iterations_per_meta must be >= 0");
  if (warmup_meta_iterations < 1 || warmup_meta_iterations > meta_iterations)
    throw std::invalid_argument("warmup_meta_iterations must satisfy 0 < I_warmup <= meta_iterations");
  if (generator_batch_size < 1) throw std::invalid_argument("generator_batch_size must be >= 1");
  if (!(performance_threshold >= 0.0 && performance_threshold <= 1.0))
    throw std::invalid_argument("performance_threshold must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
}

MetaConfig MetaConfig::defaults_for(TaskKind task) {
  MetaConfig c;
  c.generator_batch_size = task == TaskKind::SlotTagging ? 50 : 10;
  c.warmup_meta_iterations = c.meta_iterations / 3;
  return c;
}

}  // namespace gcn
