#include "gcn/fixture.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "gcn/rng.hpp"
#include "gcn/text.hpp"
#include "json.hpp"

namespace gcn::fixture {
namespace {

using nlohmann::json;

const std::map<std::string, std::vector<std::string>>& slot_values() {
  static const std::map<std::string, std::vector<std::string>> values = {
      {"city", {"boston", "denver", "paris", "tokyo"}},
      {"date", {"today", "tomorrow", "monday", "friday"}},
      {"time", {"noon", "morning", "evening"}},
      {"artist", {"adele", "queen", "prince"}},
      {"cuisine", {"thai", "sushi", "pizza"}},
      {"party_size", {"two", "four", "six"}},
  };
  return values;
}

// Placeholders are {slot}; everything else is a literal word.
const std::map<std::string, std::vector<std::string>>& templates() {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"book_flight",
       {"book the flight to {city} on {date}", "i want to fly to {city} {date}",
        "book me the flight from {city} to {city}", "fly from {city} at {time}", "i want the flight for {date}",
        "book flight to {city} in the {time}"}},
      {"get_weather",
       {"will it rain in {city} {date}", "weather in {city}", "the forecast for {date}",
        "i want the weather for {city} on {date}", "will it rain at {time}", "forecast in {city} for the {time}"}},
      {"set_alarm",
       {"set the alarm for {time}", "wake me up at {time} {date}", "set alarm on {date} at {time}",
        "i want to wake up in the {time}", "wake me at {time}", "set me the alarm {date}"}},
      {"play_music",
       {"play the song by {artist}", "i want music by {artist}", "play {artist}", "play music for me in the {time}",
        "i want to play the song {date}", "play me music by {artist} at {time}"}},
      {"find_restaurant",
       {"find the {cuisine} restaurant in {city}", "table for {party_size} at {time}", "i want to eat {cuisine} {date}",
        "find me the table for {party_size} on {date}", "eat {cuisine} in {city}",
        "find the restaurant for {party_size} in the {time}"}},
  };
  return t;
}

struct Rendered {
  std::string text;
  json slots = json::array();
};

Rendered render(const std::string& tmpl, Rng& rng) {
  Rendered out;
  for (const auto& word : split_whitespace(tmpl)) {
    if (!out.text.empty()) out.text += ' ';
    if (word.size() > 2 && word.front() == '{' && word.back() == '}') {
      const std::string slot = word.substr(1, word.size() - 2);
      const auto& choices = slot_values().at(slot);
      const std::string& value = choices[uniform_index(rng, choices.size())];
      const std::size_t start = out.text.size();  // ASCII: bytes == code points
      out.text += value;
      out.slots.push_back({{"slot", slot}, {"value", value}, {"start", start}, {"end", out.text.size()}});
    } else {
      out.text += word;
    }
  }
  return out;
}

std::size_t per_intent(SplitTag split, const Sizes& sizes) {
  switch (split) {
    case SplitTag::SeedTrain:
      return sizes.train_per_intent;
    case SplitTag::Validation:
      return sizes.validation_per_intent;
    case SplitTag::Test:
      return sizes.test_per_intent;
  }
  return 0;
}

}  // namespace

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> words;
    auto add = [&](const std::string& w) {
      if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(w);
    };
    for (const auto& [intent, ts] : templates()) {
      for (const auto& t : ts) {
        for (const auto& w : split_whitespace(t)) {
          if (w.front() != '{') add(w);
        }
      }
    }
    for (const auto& [slot, vs] : slot_values()) {
      for (const auto& v : vs) add(v);
    }
    std::sort(words.begin(), words.end());
    return words;
  }();
  return vocab;
}

const std::vector<std::string>& intents() {
  static const std::vector<std::string> names = {"book_flight", "find_restaurant", "get_weather", "play_music",
                                                 "set_alarm"};
  return names;
}

const std::vector<std::string>& slot_names() {
  static const std::vector<std::string> names = {"artist", "city", "cuisine", "date", "party_size", "time"};
  return names;
}

std::string records(TaskKind task, SplitTag split, std::uint64_t seed, const Sizes& sizes) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(split) + 1, static_cast<std::uint64_t>(task) + 11));
  const std::size_t n = per_intent(split, sizes);
  std::string out;
  if (task == TaskKind::DialogueResponse) {
    // Short conversations that stay within one intent: request, paraphrase, follow-up.
    for (std::size_t k = 0; k < n; ++k) {
      for (const auto& intent : intents()) {
        const auto& ts = templates().at(intent);
        json turns = json::array();
        const std::size_t length = 2 + uniform_index(rng, 3);
        for (std::size_t t = 0; t < length; ++t) turns.push_back(render(ts[uniform_index(rng, ts.size())], rng).text);
        out += json{{"turns", turns}}.dump() + "\n";
      }
    }
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& intent : intents()) {
      const auto& ts = templates().at(intent);
      const auto r = render(ts[uniform_index(rng, ts.size())], rng);
      json record = task == TaskKind::IntentDetection ? json{{"text", r.text}, {"intent", intent}}
                                                      : json{{"text", r.text}, {"slots", r.slots}};
      out += record.dump() + "\n";
    }
  }
  return out;
}

Bundle make(TaskKind task, std::uint64_t seed, const Sizes& sizes) {
  Bundle b;
  b.train = parse_jsonl(records(task, SplitTag::SeedTrain, seed, sizes), task, SplitTag::SeedTrain, b.phrases,
                        "fixture:train");
  b.validation = parse_jsonl(records(task, SplitTag::Validation, seed, sizes), task, SplitTag::Validation,
                             b.phrases, "fixture:validation");
  b.test = parse_jsonl(records(task, SplitTag::Test, seed, sizes), task, SplitTag::Test, b.phrases, "fixture:test");
  return b;
}

std::filesystem::path write(const std::filesystem::path& dir, TaskKind task, std::uint64_t seed, const Sizes& sizes) {
  std::filesystem::create_directories(dir);
  auto dump = [&](const char* name, SplitTag split) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw CorpusError("cannot write fixture file in '" + dir.string() + "'");
    out << records(task, split, seed, sizes);
  };
  dump("train.jsonl", SplitTag::SeedTrain);
  dump("validation.jsonl", SplitTag::Validation);
  dump("test.jsonl", SplitTag::Test);
  DatasetManifest m;
  m.task = task;
  m.train = dir / "train.jsonl";
  m.validation = dir / "validation.jsonl";
  m.test = dir / "test.jsonl";
  const auto path = dir / "manifest.txt";
  m.save(path);
  return path;
}

}  // namespace gcn::fixture
