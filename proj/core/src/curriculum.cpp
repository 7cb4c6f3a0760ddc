#include "gcn/curriculum.hpp"

#include <algorithm>
#include <stdexcept>

#include "gcn/hygiene.hpp"

namespace gcn {

CurriculumPlan plan(int i_meta, int warmup_horizon, int learner_iterations, int batch_size) {
  if (warmup_horizon < 1) throw std::invalid_argument("I_warmup must be >= 1");
  if (learner_iterations < 1) throw std::invalid_argument("I_learner must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (i_meta < 0) throw std::invalid_argument("i_meta must be >= 0");

  const long long remaining = std::max(0, warmup_horizon - i_meta);
  CurriculumPlan p;
  p.i_meta = i_meta;
  p.warmup_horizon = warmup_horizon;
  p.learner_iterations = learner_iterations;
  p.batch_size = batch_size;
  p.warmup_iterations = static_cast<int>(std::clamp<long long>(remaining * learner_iterations / warmup_horizon, 0,
                                                               learner_iterations));
  p.seed_per_batch = static_cast<int>(std::clamp<long long>(remaining * batch_size / warmup_horizon, 0, batch_size));
  return p;
}

namespace {

int seed_share(const CurriculumPlan& p, int learner_iter) {
  return learner_iter < p.warmup_iterations ? p.seed_per_batch : 0;
}

}  // namespace

BatchComposer::BatchComposer(CurriculumPlan plan, const Corpus& seed_pool,
                             std::span<const GeneratedDatapoint> generated, std::uint64_t rng_seed)
    : plan_(plan), seed_(&seed_pool), generated_(generated), rng_(rng_seed) {
  hygiene::check_access(hygiene::Component::Curriculum, seed_pool.split);
  if (plan_.seed_per_batch > 0 && plan_.warmup_iterations > 0 && seed_pool.empty())
    throw std::invalid_argument("seed pool is empty but the plan mixes seed data");
}

LabeledExample BatchComposer::next_seed() {
  if (seed_pos_ == seed_order_.size()) {
    seed_order_.resize(seed_->size());
    for (std::size_t i = 0; i < seed_order_.size(); ++i) seed_order_[i] = i;
    shuffle(seed_order_, rng_);
    seed_pos_ = 0;
  }
  return seed_->examples[seed_order_[seed_pos_++]];
}

std::size_t BatchComposer::generated_demand() const {
  std::size_t total = 0;
  for (int j = 0; j < plan_.learner_iterations; ++j)
    total += static_cast<std::size_t>(plan_.batch_size - seed_share(plan_, j));
  return total;
}

ComposeResult BatchComposer::compose(int learner_iter) {
  const int seeds = seed_share(plan_, learner_iter);
  const std::size_t wanted = static_cast<std::size_t>(plan_.batch_size - seeds);

  std::vector<std::size_t> picks;
  std::size_t pos = cursor_;
  while (picks.size() < wanted && pos < generated_.size()) {
    if (generated_[pos].usable()) picks.push_back(pos);
    ++pos;
  }
  if (picks.size() < wanted) return NeedMoreGenerated{wanted - picks.size()};
  cursor_ = pos;

  Batch batch;
  batch.reserve(static_cast<std::size_t>(plan_.batch_size));
  for (int k = 0; k < seeds; ++k) batch.push_back({next_seed(), std::nullopt});
  for (auto i : picks) batch.push_back({*generated_[i].parsed, i});
  shuffle(batch, rng_);
  return batch;
}

ComposeResult compose_batch(const CurriculumPlan& plan, int learner_iter, const Corpus& seed_pool,
                            std::span<const GeneratedDatapoint> generated_pool, Rng& rng,
                            std::size_t* generated_offset) {
  const std::size_t offset = generated_offset ? *generated_offset : 0;
  const std::size_t skip = std::min(offset, generated_pool.size());
  BatchComposer composer(plan, seed_pool, generated_pool.subspan(skip), rng());
  auto result = composer.compose(learner_iter);
  if (generated_offset && std::holds_alternative<Batch>(result)) {
    for (auto& item : std::get<Batch>(result)) {
      if (item.generated_index) *item.generated_index += skip;
    }
    *generated_offset = skip + composer.generated_consumed();
  }
  return result;
}

}  // namespace gcn
