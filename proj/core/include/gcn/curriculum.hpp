#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "gcn/corpus.hpp"
#include "gcn/datamodel.hpp"
#include "gcn/rng.hpp"

namespace gcn {

// Warmup schedule for one meta-iteration. warmup_iterations learner iterations mix
// seed_per_batch seed examples into each batch; the remaining iterations are fully generated.
struct CurriculumPlan {
  int i_meta = 0;
  int warmup_iterations = 0;  // i_w
  int seed_per_batch = 0;     // n_wb
  int warmup_horizon = 1;     // I_warmup
  int learner_iterations = 1; // I_learner
  int batch_size = 1;         // |b_gen|

  bool operator==(const CurriculumPlan&) const = default;
};

// i_w = floor((I_warmup - i_meta) / I_warmup * I_learner), n_wb = floor(|b_gen| / I_warmup * (I_warmup - i_meta)),
// both clamped to their ranges. Integer arithmetic, so the floor is exact.
// Throws std::invalid_argument when a precondition is violated.
CurriculumPlan plan(int i_meta, int warmup_horizon, int learner_iterations, int batch_size);

struct BatchItem {
  LabeledExample example;
  std::optional<std::size_t> generated_index;  // index into the generated pool, empty for seed
};

using Batch = std::vector<BatchItem>;

// Returned when the generated pool runs dry; the caller should request `missing` more
// usable datapoints from the generator.
struct NeedMoreGenerated {
  std::size_t missing = 0;
};

using ComposeResult = std::variant<Batch, NeedMoreGenerated>;

// Stateful composer for one meta-iteration. Seed examples are drawn by cycling through
// reshuffled passes over the seed pool; generated examples are consumed in pool order,
// skipping datapoints that are not usable. Batch order is shuffled.
class BatchComposer {
 public:
  BatchComposer(CurriculumPlan plan, const Corpus& seed_pool, std::span<const GeneratedDatapoint> generated,
                std::uint64_t rng_seed);

  ComposeResult compose(int learner_iter);

  // Usable generated datapoints this plan consumes over all learner iterations.
  std::size_t generated_demand() const;
  std::size_t generated_consumed() const { return cursor_; }

 private:
  LabeledExample next_seed();

  CurriculumPlan plan_;
  const Corpus* seed_;
  std::span<const GeneratedDatapoint> generated_;
  Rng rng_;
  std::vector<std::size_t> seed_order_;
  std::size_t seed_pos_ = 0;
  std::size_t cursor_ = 0;
};

// Free-function form: batch for `learner_iter` given that `generated_offset` usable
// generated datapoints were already consumed by earlier iterations.
ComposeResult compose_batch(const CurriculumPlan& plan, int learner_iter, const Corpus& seed_pool,
                            std::span<const GeneratedDatapoint> generated_pool, Rng& rng,
                            std::size_t* generated_offset = nullptr);

}  // namespace gcn
