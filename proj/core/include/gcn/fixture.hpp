#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gcn/corpus.hpp"

namespace gcn::fixture {

// Built-in templated dataset: 5 intents, 6 slot types, 50-word vocabulary.
// Intents: book_flight, get_weather, set_alarm, play_music, find_restaurant.
// Slot types: city, date, time, artist, cuisine, party_size.

struct Sizes {
  std::size_t train_per_intent = 200;
  std::size_t validation_per_intent = 40;
  std::size_t test_per_intent = 100;
};

struct Bundle {
  Corpus train;
  Corpus validation;
  Corpus test;
  SlotPhraseMap phrases;
};

const std::vector<std::string>& vocabulary();
const std::vector<std::string>& intents();
const std::vector<std::string>& slot_names();

// JSON-lines text in the external dataset schema.
std::string records(TaskKind task, SplitTag split, std::uint64_t seed, const Sizes& sizes = {});

Bundle make(TaskKind task, std::uint64_t seed = 7, const Sizes& sizes = {});

// Writes train.jsonl, validation.jsonl, test.jsonl and manifest.txt; returns the manifest path.
std::filesystem::path write(const std::filesystem::path& dir, TaskKind task, std::uint64_t seed = 7,
                            const Sizes& sizes = {});

}  // namespace gcn::fixture
