#include "gcn/metaloop.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gcn/hygiene.hpp"
#include "json.hpp"

namespace gcn {

using nlohmann::json;

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Baseline: return "baseline";
    case RunMode::GcnMinusRl: return "gcn_minus_rl";
    case RunMode::GcnPlusRl: return "gcn_plus_rl";
  }
  return "?";
}

RunMode parse_run_mode(std::string_view text) {
  std::string s;
  for (char c : text) s += c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "baseline" || s == "base") return RunMode::Baseline;
  if (s == "gcn_minus_rl") return RunMode::GcnMinusRl;
  if (s == "gcn_plus_rl") return RunMode::GcnPlusRl;
  throw std::invalid_argument("unknown mode: " + std::string(text));
}

std::string_view to_string(PromptScheme s) {
  return s == PromptScheme::Labeled ? "labeled" : "unconditional";
}

PromptScheme parse_prompt_scheme(const std::string& s) {
  if (s == "unconditional") return PromptScheme::Unconditional;
  if (s == "labeled") return PromptScheme::Labeled;
  throw std::invalid_argument("unknown prompt scheme: " + s);
}

std::string metric_name(TaskKind task) {
  switch (task) {
    case TaskKind::IntentDetection: return "accuracy";
    case TaskKind::SlotTagging: return "span_f1";
    case TaskKind::DialogueResponse: return "exp_neg_loss";
  }
  return "metric";
}

std::string checkpoint_tag(RunMode mode, std::uint64_t seed) {
  return std::string(to_string(mode)) + "_seed" + std::to_string(seed);
}

std::size_t generated_demand(const CurriculumPlan& p) {
  return static_cast<std::size_t>(p.learner_iterations - p.warmup_iterations) * static_cast<std::size_t>(p.batch_size) +
         static_cast<std::size_t>(p.warmup_iterations) * static_cast<std::size_t>(p.batch_size - p.seed_per_batch);
}

namespace {

std::uint64_t stream(const RunOptions& o, Stream s, std::uint64_t index) {
  return derive_seed(o.seed, static_cast<std::uint64_t>(s), index);
}

json record_json(const MetaIterationRecord& r) {
  return {{"i_meta", r.i_meta},
          {"p_meta", r.p_meta},
          {"mean_reward", r.mean_reward},
          {"mean_r_d", r.mean_r_d},
          {"mean_kl", r.mean_kl},
          {"beta", r.beta},
          {"seed_fraction", r.seed_fraction},
          {"generated", r.generated},
          {"parse_rate", r.parse_rate},
          {"usable_rate", r.usable_rate},
          {"learner_iterations", r.learner_iterations},
          {"final_learner_loss", r.final_learner_loss},
          {"trainable_groups", r.trainable_groups},
          {"clip_fraction", r.clip_fraction},
          {"ppo_aborted", r.ppo_aborted}};
}

MetaIterationRecord record_from_json(const json& j) {
  MetaIterationRecord r;
  r.i_meta = j.at("i_meta");
  r.p_meta = j.at("p_meta");
  r.mean_reward = j.at("mean_reward");
  r.mean_r_d = j.at("mean_r_d");
  r.mean_kl = j.at("mean_kl");
  r.beta = j.at("beta");
  r.seed_fraction = j.at("seed_fraction");
  r.generated = j.at("generated");
  r.parse_rate = j.at("parse_rate");
  r.usable_rate = j.at("usable_rate");
  r.learner_iterations = j.at("learner_iterations");
  r.final_learner_loss = j.at("final_learner_loss");
  r.trainable_groups = j.at("trainable_groups");
  r.clip_fraction = j.at("clip_fraction");
  r.ppo_aborted = j.at("ppo_aborted");
  return r;
}

PromptMode prompt_for(const RunOptions& o, TaskKind task, const LabelSpace& labels) {
  if (task == TaskKind::DialogueResponse) return PromptMode::dialogue_chain();
  if (o.prompt_scheme == PromptScheme::Labeled) return PromptMode::label_cycle(labels.intents);
  return PromptMode::unconditional();
}

// Marks parsed datapoints whose label the learner cannot represent.
void admit(std::vector<GeneratedDatapoint>& batch, const LabelSpace& labels) {
  for (auto& d : batch) {
    if (d.usable() && !labels.admits(*d.parsed)) d.rejection = "label_outside_space";
  }
}

std::size_t count_usable(const std::vector<GeneratedDatapoint>& pool) {
  return static_cast<std::size_t>(std::count_if(pool.begin(), pool.end(), [](const auto& d) { return d.usable(); }));
}

struct Pool {
  std::vector<GeneratedDatapoint> datapoints;
  std::size_t first_round = 0;  // size of the initial generation
  std::size_t first_round_parsed = 0;
  std::size_t first_round_usable = 0;
};

Pool generate_pool(const RunOptions& o, const Generator& g, const LabelSpace& labels, std::size_t n,
                   std::size_t demand, std::uint64_t base_seed, int i_meta, std::uint64_t& next_id) {
  Pool pool;
  const auto prompt = prompt_for(o, g.task(), labels);
  pool.datapoints = g.generate_batch(n, prompt, derive_seed(base_seed, 0), i_meta, next_id);
  next_id += n;
  admit(pool.datapoints, labels);
  pool.first_round = n;
  for (const auto& d : pool.datapoints) {
    pool.first_round_parsed += d.parsed ? 1 : 0;
    pool.first_round_usable += d.usable() ? 1 : 0;
  }
  std::size_t usable = pool.first_round_usable;
  for (int round = 1; round <= o.max_generation_rounds && usable < demand; ++round) {
    const std::size_t extra = std::max<std::size_t>(demand - usable, static_cast<std::size_t>(o.meta.generator_batch_size));
    auto more = g.generate_batch(extra, prompt, derive_seed(base_seed, static_cast<std::uint64_t>(round)), i_meta, next_id);
    next_id += extra;
    admit(more, labels);
    usable += count_usable(more);
    for (auto& d : more) pool.datapoints.push_back(std::move(d));
  }
  return pool;
}

// Pool handed to the curriculum: usable datapoints recycled when the generator fell short.
std::vector<GeneratedDatapoint> training_pool(const std::vector<GeneratedDatapoint>& pool, std::size_t demand) {
  std::vector<GeneratedDatapoint> out = pool;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (pool[i].usable()) usable.push_back(i);
  if (usable.empty()) return out;
  for (std::size_t k = 0, have = usable.size(); have < demand; ++k, ++have) out.push_back(pool[usable[k % usable.size()]]);
  return out;
}

struct LearnerRun {
  std::unique_ptr<LearnerBackend> learner;
  TrainingResult training;
  std::size_t seed_examples = 0;
  std::size_t total_examples = 0;
};

LearnerRun train_learner(const RunOptions& o, const LabelSpace& labels, std::uint64_t learner_seed,
                         const CurriculumPlan& plan, const Corpus& seed, std::span<const GeneratedDatapoint> pool,
                         std::uint64_t curriculum_seed, int i_meta) {
  LearnerRun lr;
  lr.learner = o.learner_factory ? o.learner_factory(labels, learner_seed, o.learner)
                                 : spawn(labels, learner_seed, o.learner);
  BatchComposer composer(plan, seed, pool, curriculum_seed);
  lr.training = train(
      *lr.learner,
      [&](int it) -> std::optional<std::vector<LabeledExample>> {
        auto r = composer.compose(it);
        if (std::holds_alternative<NeedMoreGenerated>(r)) return std::nullopt;
        const auto& batch = std::get<Batch>(r);
        if (o.batch_observer) o.batch_observer(i_meta, it, plan, batch);
        std::vector<LabeledExample> ex;
        ex.reserve(batch.size());
        for (const auto& item : batch) {
          if (!item.generated_index) ++lr.seed_examples;
          ex.push_back(item.example);
        }
        lr.total_examples += ex.size();
        return ex;
      },
      plan.learner_iterations);
  return lr;
}

std::string datapoint_json(const RunOptions& o, const GeneratedDatapoint& d) {
  json j{{"mode", std::string(to_string(o.mode))},
         {"seed", o.seed},
         {"i_meta", d.meta_iteration},
         {"id", d.id},
         {"raw_text", d.raw_text},
         {"usable", d.usable()}};
  if (d.parsed) {
    j["label"] = d.parsed->label;
    j["utterance"] = d.parsed->utterance;
  }
  if (d.rejection) j["rejection"] = *d.rejection;
  if (d.reward) {
    j["p_meta"] = d.reward->p_meta;
    j["p_d"] = d.reward->p_d;
    j["r_d"] = d.reward->r_d;
    j["kl_term"] = d.reward->kl_term;
    j["final_reward"] = d.reward->final_reward;
  }
  return j.dump();
}

struct Checkpoint {
  int next_meta = 0;
  std::vector<MetaIterationRecord> history;
  KLController controller;
  std::uint64_t next_id = 0;
  double best_p_meta = 0.0;
  bool early_stopped = false;
};

std::filesystem::path checkpoint_root(const RunOptions& o) {
  return *o.run_dir / "checkpoints" / checkpoint_tag(o.mode, o.seed);
}

void save_checkpoint(const RunOptions& o, const Generator& g, const Checkpoint& c) {
  char name[32];
  std::snprintf(name, sizeof name, "meta_%03d", c.next_meta - 1);
  const auto dir = checkpoint_root(o) / name;
  g.save(dir / "generator");
  json hist = json::array();
  for (const auto& r : c.history) hist.push_back(record_json(r));
  json j{{"next_meta", c.next_meta},
         {"history", hist},
         {"controller",
          {{"beta", c.controller.beta},
           {"target_kl", c.controller.target_kl},
           {"horizon", c.controller.horizon},
           {"adaptive", c.controller.adaptive}}},
         {"next_id", c.next_id},
         {"best_p_meta", c.best_p_meta},
         {"early_stopped", c.early_stopped}};
  // state.json is written last so a partial checkpoint is never picked up on resume.
  write_file(dir / "state.json", j.dump(2) + "\n");
}

std::optional<std::pair<Checkpoint, std::filesystem::path>> latest_checkpoint(const RunOptions& o) {
  const auto root = checkpoint_root(o);
  if (!std::filesystem::exists(root)) return std::nullopt;
  std::optional<std::filesystem::path> best;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!std::filesystem::exists(entry.path() / "state.json")) continue;
    if (!best || entry.path().filename() > best->filename()) best = entry.path();
  }
  if (!best) return std::nullopt;
  const auto j = json::parse(read_file(*best / "state.json"));
  Checkpoint c;
  c.next_meta = j.at("next_meta");
  for (const auto& r : j.at("history")) c.history.push_back(record_from_json(r));
  const auto& k = j.at("controller");
  c.controller.beta = k.at("beta");
  c.controller.target_kl = k.at("target_kl");
  c.controller.horizon = k.at("horizon");
  c.controller.adaptive = k.at("adaptive");
  c.next_id = j.at("next_id");
  c.best_p_meta = j.at("best_p_meta");
  c.early_stopped = j.at("early_stopped");
  return std::make_pair(c, *best);
}

bool should_stop(double p_meta, double epsilon) { return epsilon > 0.0 && epsilon < 1.0 && p_meta >= epsilon; }

}  // namespace

FinalEvaluation final_evaluation(const RunOptions& o, const Generator& g, const LabelSpace& labels, const Corpus& seed,
                                 const Corpus& test) {
  if (!(o.final_seed_fraction >= 0.0 && o.final_seed_fraction <= 1.0))
    throw std::invalid_argument("final_seed_fraction must lie in [0, 1]");
  CurriculumPlan fplan = plan(o.meta.warmup_meta_iterations, std::max(1, o.meta.warmup_meta_iterations),
                              o.meta.learner_iterations_per_meta, o.meta.generator_batch_size);
  if (!seed.empty()) {
    fplan.seed_per_batch = static_cast<int>(std::floor(o.final_seed_fraction * fplan.batch_size));
    fplan.warmup_iterations = fplan.seed_per_batch > 0 ? fplan.learner_iterations : 0;
  }
  const std::size_t n = generated_demand(fplan);
  std::uint64_t next_id = 0;
  auto pool = generate_pool(o, g, labels, n, n, stream(o, Stream::FinalGenerate, 0), -1, next_id);
  FinalEvaluation fe;
  fe.dataset_size = pool.first_round;
  fe.parse_rate = n ? static_cast<double>(pool.first_round_parsed) / static_cast<double>(n) : 0.0;
  fe.usable_rate = n ? static_cast<double>(pool.first_round_usable) / static_cast<double>(n) : 0.0;
  fe.degenerate = fe.parse_rate < 0.5;
  for (std::size_t i = 0; i < pool.first_round; ++i)
    if (pool.datapoints[i].parsed) fe.utterances.push_back(pool.datapoints[i].parsed->utterance);

  const auto tpool = training_pool(pool.datapoints, n);
  auto lr = train_learner(o, labels, stream(o, Stream::FinalLearner, 0), fplan, seed, tpool,
                          stream(o, Stream::FinalCurriculum, 0), -1);
  fe.test_metric = lr.learner->evaluate(test, hygiene::Component::FinalLearnerEvaluation).metric;
  return fe;
}

FinalReport run(const RunOptions& o, const Corpus& seed, const Corpus& validation, const Corpus& test,
                const Corpus* full_train) {
  const auto t0 = std::chrono::steady_clock::now();
  o.meta.validate();
  if (seed.task != validation.task || seed.task != test.task) throw std::invalid_argument("corpora must share a task");
  if (seed.examples.empty()) throw std::invalid_argument("empty seed corpus");

  FinalReport report;
  report.mode = o.mode;
  report.seed = o.seed;
  report.task = seed.task;
  report.metric_name = metric_name(seed.task);
  const LabelSpace labels = LabelSpace::from_corpus(seed);
  if (o.prompt_scheme == PromptScheme::Labeled && seed.task != TaskKind::IntentDetection)
    throw std::invalid_argument("labeled prompting needs an intent detection task");

  std::optional<JsonlWriter> events, rewards;
  if (o.run_dir) {
    std::filesystem::create_directories(*o.run_dir);
    events.emplace(*o.run_dir / "events.jsonl");
    if (o.mode != RunMode::Baseline) rewards.emplace(*o.run_dir / "rewards.jsonl");
  }
  const json tag{{"mode", std::string(to_string(o.mode))}, {"seed", o.seed}};
  auto emit = [&](const std::string& event, json body) {
    if (!events) return;
    body["event"] = event;
    body.update(tag);
    events->append(body.dump());
  };

  if (o.mode == RunMode::Baseline) {
    const CurriculumPlan bplan = plan(0, std::max(1, o.meta.warmup_meta_iterations), o.meta.learner_iterations_per_meta,
                                      o.meta.generator_batch_size);
    auto lr = train_learner(o, labels, stream(o, Stream::Baseline, 0), bplan, seed, {}, stream(o, Stream::Baseline, 1), -1);
    report.test_metric = lr.learner->evaluate(test, hygiene::Component::FinalLearnerEvaluation).metric;
    emit("final", {{"test_metric", report.test_metric},
                   {"learner_iterations", lr.training.iterations_used},
                   {"final_learner_loss", lr.training.loss_curve.empty() ? 0.0 : lr.training.loss_curve.back()}});
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
  }

  std::set<std::string> phrases;
  if (seed.task == TaskKind::SlotTagging) phrases = slot_phrases(seed);

  Checkpoint state;
  state.controller = o.controller;
  std::optional<Generator> generator;
  if (o.resume && o.run_dir) {
    if (auto found = latest_checkpoint(o)) {
      state = found->first;
      generator.emplace(Generator::load(found->second / "generator"));
      generator->mutable_config().workers = o.generator.workers;
      emit("resume", {{"next_meta", state.next_meta}});
    }
  }
  if (!generator) {
    TinyLMConfig lm = o.tiny_lm;
    lm.seed = derive_seed(o.seed, o.tiny_lm.seed);
    auto backend = o.backend_factory ? o.backend_factory(seed) : make_tiny_backend(seed, o.separators, lm);
    generator.emplace(std::move(backend), o.generator, o.separators, seed.task, phrases);
    Rng rng(stream(o, Stream::Pretrain, 0));
    const double loss = generator->pretrain_on_seed(seed, rng);
    emit("pretrain", {{"loss", loss}, {"parameters", generator->policy().parameter_count()}});
  }
  Generator& g = *generator;

  for (int i_meta = state.next_meta; i_meta < o.meta.meta_iterations && !state.early_stopped; ++i_meta) {
    const CurriculumPlan cp = plan(i_meta, std::max(1, o.meta.warmup_meta_iterations), o.meta.learner_iterations_per_meta,
                                   o.meta.generator_batch_size);
    const std::size_t n = static_cast<std::size_t>(o.meta.learner_iterations_per_meta) *
                          static_cast<std::size_t>(o.meta.generator_batch_size);
    auto pool = generate_pool(o, g, labels, n, generated_demand(cp), stream(o, Stream::Generate, i_meta), i_meta,
                              state.next_id);
    const auto tpool = training_pool(pool.datapoints, generated_demand(cp));
    auto lr = train_learner(o, labels, stream(o, Stream::Learner, static_cast<std::uint64_t>(i_meta)), cp, seed, tpool,
                            stream(o, Stream::Curriculum, static_cast<std::uint64_t>(i_meta)), i_meta);
    const double p_meta = lr.learner->evaluate(validation, hygiene::Component::LearnerEvaluation).metric;

    MetaIterationRecord rec;
    rec.i_meta = i_meta;
    rec.p_meta = p_meta;
    rec.generated = pool.datapoints.size();
    rec.parse_rate = static_cast<double>(pool.first_round_parsed) / static_cast<double>(pool.first_round);
    rec.usable_rate = static_cast<double>(pool.first_round_usable) / static_cast<double>(pool.first_round);
    rec.learner_iterations = lr.training.iterations_used;
    rec.final_learner_loss = lr.training.loss_curve.empty() ? 0.0 : lr.training.loss_curve.back();
    rec.seed_fraction =
        lr.total_examples ? static_cast<double>(lr.seed_examples) / static_cast<double>(lr.total_examples) : 0.0;

    // Every generated datapoint is rewarded, including top-ups the curriculum did not consume.
    double sum_final = 0.0, sum_rd = 0.0;
    for (auto& d : pool.datapoints) {
      const double p_d = per_datapoint_performance(d, *lr.learner);
      d.reward = make_reward_record(p_meta, p_d, o.meta.alpha, d.token_logprobs_policy, d.token_logprobs_reference,
                                    state.controller);
      sum_final += d.reward->final_reward;
      sum_rd += d.reward->r_d;
      if (rewards) rewards->append(datapoint_json(o, d));
    }
    rec.mean_reward = sum_final / static_cast<double>(pool.datapoints.size());
    rec.mean_r_d = sum_rd / static_cast<double>(pool.datapoints.size());
    rec.beta = state.controller.beta;

    if (o.mode == RunMode::GcnPlusRl) {
      Rng rng(stream(o, Stream::Ppo, static_cast<std::uint64_t>(i_meta)));
      const auto us = g.ppo_update(pool.datapoints, state.controller, rng);
      rec.mean_kl = us.mean_kl;
      rec.clip_fraction = us.clip_fraction;
      rec.ppo_aborted = us.aborted;
      if (us.aborted) emit("ppo_abort", {{"i_meta", i_meta}, {"batch_first_id", pool.datapoints.front().id}});
      g.advance_unfreeze(i_meta + 1);
      if (g.config().sync_every > 0 && (i_meta + 1) % g.config().sync_every == 0) g.sync_reference();
    } else {
      double kl = 0.0;
      for (const auto& d : pool.datapoints)
        for (std::size_t t = 0; t < d.token_logprobs_policy.size(); ++t)
          kl += d.token_logprobs_policy[t] - d.token_logprobs_reference[t];
      rec.mean_kl = kl / static_cast<double>(pool.datapoints.size());
    }
    rec.trainable_groups = g.policy().trainable_groups();

    state.history.push_back(rec);
    state.best_p_meta = std::max(state.best_p_meta, p_meta);
    state.early_stopped = should_stop(p_meta, o.meta.performance_threshold);
    state.next_meta = i_meta + 1;
    emit("meta_iteration", record_json(rec));
    if (o.run_dir && o.write_checkpoints) save_checkpoint(o, g, state);
  }

  report.history = state.history;
  report.best_p_meta = state.best_p_meta;
  report.early_stopped = state.early_stopped;

  const auto fe = final_evaluation(o, g, labels, seed, test);
  report.test_metric = fe.test_metric;
  report.final_dataset_size = fe.dataset_size;
  report.final_parse_rate = fe.parse_rate;
  report.final_usable_rate = fe.usable_rate;
  report.degenerate = fe.degenerate;
  report.final_utterances = fe.utterances;

  std::vector<std::string> seed_u, train_u, test_u;
  for (const auto& e : seed.examples) seed_u.push_back(e.utterance);
  for (const auto& e : (full_train ? *full_train : seed).examples) train_u.push_back(e.utterance);
  for (const auto& e : test.examples) test_u.push_back(e.utterance);
  if (!fe.utterances.empty()) report.creativity = analyze(fe.utterances, seed_u, train_u, test_u);

  json final_body{{"test_metric", report.test_metric},
                  {"final_dataset_size", report.final_dataset_size},
                  {"final_parse_rate", report.final_parse_rate},
                  {"final_usable_rate", report.final_usable_rate},
                  {"degenerate", report.degenerate},
                  {"early_stopped", report.early_stopped}};
  if (report.creativity) {
    final_body["creativity"] = {{"seed_em", report.creativity->seed_em},
                                {"train_em", report.creativity->train_em},
                                {"self_bleu", report.creativity->self_bleu},
                                {"oov_rate", report.creativity->oov_rate},
                                {"vocab_size", report.creativity->vocab_size}};
  }
  emit("final", final_body);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace gcn
