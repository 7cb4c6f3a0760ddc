#include "gcn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gcn/keyvalue.hpp"
#include "gcn/rng.hpp"
#include "gcn/text.hpp"
#include "gcn/wireformat.hpp"
#include "json.hpp"

namespace gcn {

using nlohmann::json;

std::string_view to_string(SplitTag split) {
  switch (split) {
    case SplitTag::SeedTrain:
      return "seed_train";
    case SplitTag::Validation:
      return "validation";
    case SplitTag::Test:
      return "test";
  }
  return "unknown";
}

std::string SlotPhraseMap::phrase(std::string_view slot_name) const {
  if (auto it = overrides_.find(std::string(slot_name)); it != overrides_.end()) return it->second;
  return slot_name_to_phrase(slot_name);
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  const auto kv = read_key_value_file(path);
  const auto base = path.parent_path();
  DatasetManifest m;
  std::map<std::string, std::string> phrases;
  bool have_task = false;
  for (const auto& [key, value] : kv) {
    if (key == "task") {
      try {
        m.task = parse_task_kind(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what());
      }
      have_task = true;
    } else if (key == "train") {
      m.train = base / value;
    } else if (key == "validation") {
      m.validation = base / value;
    } else if (key == "test") {
      m.test = base / value;
    } else if (key.rfind("slot.", 0) == 0 && key.size() > 5) {
      phrases[key.substr(5)] = join(split_whitespace(normalize_text(value)));
    } else {
      throw ConfigError(path.string() + ": unknown manifest key '" + key + "'");
    }
  }
  if (!have_task) throw ConfigError(path.string() + ": missing 'task'");
  if (m.train.empty()) throw ConfigError(path.string() + ": missing 'train'");
  if (m.test.empty()) throw ConfigError(path.string() + ": missing 'test'");
  m.slot_phrases = SlotPhraseMap(std::move(phrases));
  return m;
}

void DatasetManifest::save(const std::filesystem::path& path) const {
  const auto base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) { return std::filesystem::relative(p, base).generic_string(); };
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write manifest '" + path.string() + "'");
  out << "task = " << to_string(task) << "\n";
  out << "train = " << rel(train) << "\n";
  if (validation) out << "validation = " << rel(*validation) << "\n";
  out << "test = " << rel(test) << "\n";
  for (const auto& [name, phrase] : slot_phrases.overrides()) out << "slot." << name << " = " << phrase << "\n";
}

namespace {

[[noreturn]] void schema_error(std::string_view source, int line, std::string_view what) {
  throw CorpusError(std::string(source) + ":" + std::to_string(line) + ": " + std::string(what));
}

const json& require(const json& record, const char* field, std::string_view source, int line) {
  if (!record.contains(field)) schema_error(source, line, std::string("missing field '") + field + "'");
  return record.at(field);
}

std::string require_string(const json& record, const char* field, std::string_view source, int line) {
  const auto& v = require(record, field, source, line);
  if (!v.is_string()) schema_error(source, line, std::string("field '") + field + "' must be a string");
  return v.get<std::string>();
}

void check_valid(const LabeledExample& e, std::string_view source, int line) {
  const auto result = validate_example(e);
  if (!result.ok()) {
    schema_error(source, line, "invalid example (" + std::string(to_string(result.violations.front().code)) +
                                   ": " + result.violations.front().detail + ")");
  }
}

LabeledExample load_slot_record(const json& record, const SlotPhraseMap& phrases, std::string_view source,
                                int line) {
  const std::string text = require_string(record, "text", source, line);
  const auto& slots = require(record, "slots", source, line);
  if (!slots.is_array()) schema_error(source, line, "field 'slots' must be an array");
  const std::size_t length = codepoint_length(text);

  struct Raw {
    std::string name;
    std::string value;
    std::size_t start;
    std::size_t end;
  };
  std::vector<Raw> raw;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& s = slots[k];
    const std::string where = "slots[" + std::to_string(k) + "]";
    if (!s.is_object()) schema_error(source, line, where + " must be an object");
    const std::string name = require_string(s, "slot", source, line);
    const std::string value = require_string(s, "value", source, line);
    const auto& start = require(s, "start", source, line);
    const auto& end = require(s, "end", source, line);
    if (!start.is_number_integer() || !end.is_number_integer())
      schema_error(source, line, where + ".start/end must be integers");
    const auto b = start.get<long long>();
    const auto e = end.get<long long>();
    if (b < 0 || e <= b || static_cast<std::size_t>(e) > length)
      schema_error(source, line, where + " has invalid offsets [" + std::to_string(b) + "," + std::to_string(e) + ")");
    const std::size_t bb = codepoint_to_byte_offset(text, static_cast<std::size_t>(b));
    const std::size_t eb = codepoint_to_byte_offset(text, static_cast<std::size_t>(e));
    const std::string covered = text.substr(bb, eb - bb);
    if (normalize_text(covered) != normalize_text(value)) {
      throw CorpusError(std::string(source) + ":" + std::to_string(line) + ": record slot '" + name + "' span [" +
                        std::to_string(b) + "," + std::to_string(e) + ") reads '" + covered +
                        "' but value is '" + value + "'");
    }
    raw.push_back({name, value, bb, eb});
  }
  std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.start < b.start; });
  for (std::size_t k = 1; k < raw.size(); ++k) {
    if (raw[k].start < raw[k - 1].end) schema_error(source, line, "overlapping slot spans");
  }

  const auto tokens = tokenize_with_offsets(text);
  std::vector<std::string> tags(tokens.size(), "O");
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& r : raw) {
    const std::string phrase = phrases.phrase(r.name);
    const std::string type = phrase_to_tag_type(phrase);
    bool first = true;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].end <= r.start || tokens[i].begin >= r.end) continue;
      if (tags[i] != "O") schema_error(source, line, "slot spans share a token");
      tags[i] = (first ? "B-" : "I-") + type;
      first = false;
    }
    pairs.emplace_back(phrase, join(split_whitespace(normalize_text(r.value))));
  }

  LabeledExample e;
  e.task = TaskKind::SlotTagging;
  e.utterance = normalize_text(text);
  e.label = make_slot_label(pairs);
  if (tokenize(e.utterance).size() != tags.size())
    schema_error(source, line, "tokenization changed under normalization");
  e.iob_tags = std::move(tags);
  return e;
}

}  // namespace

Corpus parse_jsonl(std::string_view text, TaskKind task, SplitTag split, const SlotPhraseMap& phrases,
                   std::string_view source) {
  Corpus corpus;
  corpus.task = task;
  corpus.split = split;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      schema_error(source, number, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) schema_error(source, number, "record must be a JSON object");

    switch (task) {
      case TaskKind::IntentDetection: {
        LabeledExample e;
        e.task = task;
        e.utterance = normalize_text(require_string(record, "text", source, number));
        e.label = normalize_text(require_string(record, "intent", source, number));
        check_valid(e, source, number);
        corpus.examples.push_back(std::move(e));
        break;
      }
      case TaskKind::SlotTagging: {
        auto e = load_slot_record(record, phrases, source, number);
        check_valid(e, source, number);
        corpus.examples.push_back(std::move(e));
        break;
      }
      case TaskKind::DialogueResponse: {
        const auto& turns = require(record, "turns", source, number);
        if (!turns.is_array()) schema_error(source, number, "field 'turns' must be an array");
        std::vector<std::string> texts;
        for (const auto& t : turns) {
          if (!t.is_string()) schema_error(source, number, "field 'turns' must contain strings");
          texts.push_back(normalize_text(t.get<std::string>()));
        }
        for (std::size_t i = 0; i + 1 < texts.size(); ++i) {
          LabeledExample e;
          e.task = task;
          e.label = texts[i];
          e.utterance = texts[i + 1];
          check_valid(e, source, number);
          corpus.examples.push_back(std::move(e));
        }
        break;
      }
    }
  }
  return corpus;
}

Corpus load(const std::filesystem::path& path, TaskKind task, SplitTag split, const SlotPhraseMap& phrases) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open dataset '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_jsonl(buffer.str(), task, split, phrases, path.string());
}

std::string to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& e : corpus.examples) {
    json record;
    switch (corpus.task) {
      case TaskKind::IntentDetection:
        record = {{"text", e.utterance}, {"intent", e.label}};
        break;
      case TaskKind::SlotTagging: {
        json slots = json::array();
        const auto tokens = tokenize_with_offsets(e.utterance);
        const auto& tags = e.iob_tags.value_or(std::vector<std::string>(tokens.size(), "O"));
        for (std::size_t i = 0; i < tags.size() && i < tokens.size(); ++i) {
          if (tags[i].rfind("B-", 0) != 0) continue;
          std::size_t j = i + 1;
          while (j < tags.size() && tags[j] == "I-" + tags[i].substr(2)) ++j;
          const std::size_t b = tokens[i].begin;
          const std::size_t en = tokens[j - 1].end;
          slots.push_back({{"slot", tags[i].substr(2)},
                           {"value", e.utterance.substr(b, en - b)},
                           {"start", byte_to_codepoint_offset(e.utterance, b)},
                           {"end", byte_to_codepoint_offset(e.utterance, en)}});
        }
        record = {{"text", e.utterance}, {"slots", slots}};
        break;
      }
      case TaskKind::DialogueResponse:
        record = {{"turns", json::array({e.label, e.utterance})}};
        break;
    }
    out += record.dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write dataset '" + path.string() + "'");
  out << to_jsonl(corpus);
}

std::set<std::string> slot_types(const LabeledExample& e) {
  std::set<std::string> out;
  if (!e.iob_tags) return out;
  for (const auto& t : *e.iob_tags) {
    if (t.size() > 2 && (t[0] == 'B' || t[0] == 'I') && t[1] == '-') out.insert(t.substr(2));
  }
  return out;
}

std::set<std::string> slot_phrases(const Corpus& corpus) {
  std::set<std::string> out;
  for (const auto& e : corpus.examples) {
    for (const auto& type : slot_types(e)) {
      std::string phrase = type;
      std::replace(phrase.begin(), phrase.end(), '_', ' ');
      out.insert(phrase);
    }
  }
  return out;
}

std::string stratification_class(const LabeledExample& e) {
  switch (e.task) {
    case TaskKind::IntentDetection:
      return e.label;
    case TaskKind::SlotTagging: {
      const auto types = slot_types(e);
      return types.empty() ? std::string(kNoSlotsLabel) : join(std::vector<std::string>(types.begin(), types.end()), "+");
    }
    case TaskKind::DialogueResponse: {
      const std::size_t n = tokenize(e.utterance).size();
      if (n <= 5) return "len:1-5";
      if (n <= 10) return "len:6-10";
      if (n <= 20) return "len:11-20";
      return "len:21+";
    }
  }
  return {};
}

std::size_t round_half_up(double x) {
  if (x <= 0.0) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

namespace {

std::map<std::string, std::vector<std::size_t>> group_by_class(const Corpus& c) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < c.examples.size(); ++i) groups[stratification_class(c.examples[i])].push_back(i);
  return groups;
}

Corpus take(const Corpus& c, std::vector<std::size_t> indices, SplitTag split) {
  std::sort(indices.begin(), indices.end());
  Corpus out;
  out.task = c.task;
  out.split = split;
  for (auto i : indices) out.examples.push_back(c.examples[i]);
  return out;
}

}  // namespace

SampleResult stratified_sample(const Corpus& c, const SampleSpec& spec) {
  if (c.split == SplitTag::Test) throw CorpusError("the test split is never subsampled");
  if (!(spec.fraction > 0.0 && spec.fraction <= 100.0)) throw CorpusError("sample fraction must lie in (0, 100]");
  if (spec.min_per_class < 1) throw CorpusError("min_per_class must be >= 1");

  Rng rng(derive_seed(spec.rng_seed, 0x5a3b1e));
  auto groups = group_by_class(c);
  for (auto& [cls, idx] : groups) shuffle(idx, rng);

  SampleResult result;
  std::vector<bool> chosen(c.examples.size(), false);
  std::map<std::string, std::size_t> drawn;

  if (c.task == TaskKind::SlotTagging) {
    // Greedy cover: every slot type needs min_per_class examples.
    std::map<std::string, std::size_t> need;
    for (const auto& e : c.examples) {
      for (const auto& t : slot_types(e)) need[t] = spec.min_per_class;
    }
    std::vector<std::size_t> order(c.examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);
    auto gain = [&](std::size_t i) {
      std::size_t g = 0;
      for (const auto& t : slot_types(c.examples[i])) g += need[t] > 0 ? 1 : 0;
      return g;
    };
    while (true) {
      std::size_t best = order.size();
      std::size_t best_gain = 0;
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (chosen[order[k]]) continue;
        const std::size_t g = gain(order[k]);
        if (g > best_gain) {
          best_gain = g;
          best = k;
        }
      }
      if (best_gain == 0) break;
      const std::size_t i = order[best];
      chosen[i] = true;
      ++drawn[stratification_class(c.examples[i])];
      for (const auto& t : slot_types(c.examples[i])) {
        if (need[t] > 0) --need[t];
      }
    }
  }

  for (auto& [cls, idx] : groups) {
    const std::size_t proportional = round_half_up(spec.fraction * static_cast<double>(idx.size()) / 100.0);
    std::size_t target = proportional;
    bool bound = false;
    if (c.task != TaskKind::SlotTagging && target < spec.min_per_class) {
      target = std::min(spec.min_per_class, idx.size());
      bound = true;
    }
    std::size_t have = drawn[cls];
    for (auto i : idx) {
      if (have >= target) break;
      if (chosen[i]) continue;
      chosen[i] = true;
      ++have;
    }
    if (c.task == TaskKind::SlotTagging && have > proportional) bound = true;
    result.classes.push_back({cls, idx.size(), have, bound});
    result.min_rule_bound = result.min_rule_bound || bound;
  }

  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (chosen[i]) indices.push_back(i);
  }
  result.corpus = take(c, std::move(indices), c.split);
  return result;
}

std::pair<Corpus, Corpus> split(const Corpus& c, double train_fraction, std::uint64_t rng_seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw CorpusError("train_fraction must lie in (0, 1)");
  if (c.split != SplitTag::SeedTrain) throw CorpusError("only a training corpus can be split");
  Rng rng(derive_seed(rng_seed, 0x5b1170));
  std::vector<std::size_t> train, val;
  for (auto& [cls, idx] : group_by_class(c)) {
    shuffle(idx, rng);
    const std::size_t n_train = std::min(idx.size(), round_half_up(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < idx.size(); ++k) (k < n_train ? train : val).push_back(idx[k]);
  }
  return {take(c, std::move(train), SplitTag::SeedTrain), take(c, std::move(val), SplitTag::Validation)};
}

Corpus remove_rare_classes(const Corpus& c, std::size_t min_count) {
  std::vector<std::size_t> keep;
  for (const auto& [cls, idx] : group_by_class(c)) {
    if (idx.size() >= min_count) keep.insert(keep.end(), idx.begin(), idx.end());
  }
  return take(c, std::move(keep), c.split);
}

}  // namespace gcn
