#include "gcn/generator.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "gcn/hygiene.hpp"
#include "gcn/wireformat.hpp"
#include "json.hpp"

namespace gcn {

std::size_t UnfreezeSchedule::groups_at(int i_meta, std::size_t total_groups) const {
  std::size_t n = initial_groups;
  if (every > 0 && i_meta > 0) n += static_cast<std::size_t>(i_meta / every);
  return std::min(n, total_groups);
}

std::string_view to_string(SyncMode mode) {
  switch (mode) {
    case SyncMode::PolicyToReference: return "policy_to_reference";
    case SyncMode::ReferenceToPolicy: return "reference_to_policy";
    case SyncMode::Disabled: return "disabled";
  }
  return "?";
}

SyncMode parse_sync_mode(std::string_view text) {
  if (text == "policy_to_reference") return SyncMode::PolicyToReference;
  if (text == "reference_to_policy") return SyncMode::ReferenceToPolicy;
  if (text == "disabled") return SyncMode::Disabled;
  throw std::invalid_argument("unknown sync mode: " + std::string(text));
}

std::unique_ptr<TinyLM> make_tiny_backend(const Corpus& seed, const SeparatorSet& separators,
                                          const TinyLMConfig& config) {
  std::vector<std::string> texts;
  texts.reserve(seed.examples.size());
  for (const auto& e : seed.examples) texts.push_back(serialize(e, separators));
  auto vocab = Vocabulary::build(texts, separators);
  const int eos = vocab.id(separators.eos);
  return std::make_unique<TinyLM>(std::move(vocab), eos, config);
}

Generator::Generator(std::unique_ptr<LanguageModelBackend> policy, GeneratorConfig config, SeparatorSet separators,
                     TaskKind task, std::set<std::string> slot_phrases)
    : policy_(std::move(policy)),
      config_(std::move(config)),
      separators_(std::move(separators)),
      task_(task),
      slot_phrases_(std::move(slot_phrases)) {
  if (!policy_) throw std::invalid_argument("generator needs a policy backend");
  separators_.validate();
  reference_ = policy_->clone();
  policy_->set_trainable_groups(config_.unfreeze.groups_at(0, policy_->parameter_group_count()));
}

double Generator::pretrain_on_seed(const Corpus& seed, Rng& rng) {
  hygiene::check_access(hygiene::Component::Generator, seed.split);
  if (seed.examples.empty()) {
    if (!config_.allow_cold_start) throw std::invalid_argument("empty seed corpus and cold start disabled");
    pretrained_ = true;
    return 0.0;
  }
  std::vector<std::vector<int>> sequences;
  for (const auto& e : seed.examples) sequences.push_back(policy_->tokenize(serialize(e, separators_)));
  policy_->set_trainable_groups(policy_->parameter_group_count());
  double loss = 0.0;
  std::vector<std::size_t> order(sequences.size());
  std::size_t cursor = order.size();
  const std::size_t bs = static_cast<std::size_t>(std::max(1, config_.pretrain_batch_size));
  for (int step = 0; step < config_.pretrain_steps; ++step) {
    std::vector<std::vector<int>> batch;
    while (batch.size() < std::min(bs, sequences.size())) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        shuffle(order, rng);
        cursor = 0;
      }
      batch.push_back(sequences[order[cursor++]]);
    }
    loss = policy_->train_supervised(batch, config_.pretrain_learning_rate);
  }
  reference_ = policy_->clone();
  policy_->set_trainable_groups(config_.unfreeze.groups_at(0, policy_->parameter_group_count()));
  pretrained_ = true;
  return loss;
}

GeneratedDatapoint Generator::interpret(std::vector<int> prompt, Sample sample, std::uint64_t id,
                                        int meta_iteration) const {
  GeneratedDatapoint d;
  d.id = id;
  d.meta_iteration = meta_iteration;
  std::vector<int> all = prompt;
  all.insert(all.end(), sample.tokens.begin(), sample.tokens.end());
  d.raw_text = policy_->detokenize(all);
  d.prompt_tokens = std::move(prompt);
  d.generated_tokens = std::move(sample.tokens);
  d.token_logprobs_policy = std::move(sample.logprobs);
  auto parsed = parse(d.raw_text, separators_, task_);
  if (auto* bad = std::get_if<Malformed>(&parsed)) {
    d.rejection = std::string(to_string(bad->reason));
    return d;
  }
  auto example = std::get<LabeledExample>(std::move(parsed));
  if (task_ == TaskKind::SlotTagging) {
    auto aligned = align_iob(example.label, example.utterance, slot_phrases_);
    if (auto* fail = std::get_if<AlignmentFailure>(&aligned)) {
      d.rejection = "alignment_" + fail->reason;
    } else {
      example.iob_tags = std::get<std::vector<std::string>>(std::move(aligned));
    }
  }
  d.parsed = std::move(example);
  return d;
}

std::vector<GeneratedDatapoint> Generator::generate_batch(std::size_t n, const PromptMode& prompt,
                                                          std::uint64_t stream_seed, int meta_iteration,
                                                          std::uint64_t first_id) const {
  if (!pretrained_ && !config_.allow_cold_start)
    throw std::logic_error("generator sampled before pretraining with cold start disabled");
  std::vector<GeneratedDatapoint> out(n);
  if (n == 0) return out;

  auto make_prompt = [&](const std::string& text) {
    std::string p = separators_.bos;
    if (!text.empty()) p += ' ' + text + ' ' + separators_.go;
    return policy_->tokenize(p);
  };
  auto one = [&](std::size_t i, const std::vector<int>& prompt_tokens) {
    Rng rng(derive_seed(stream_seed, i));
    Sample s = policy_->sample(prompt_tokens, config_.sampler, rng);
    auto d = interpret(prompt_tokens, std::move(s), first_id + i, meta_iteration);
    d.token_logprobs_reference = reference_->score(d.prompt_tokens, d.generated_tokens).logprobs;
    return d;
  };

  if (prompt.kind == PromptMode::Kind::DialogueChain) {
    // Each response becomes the next turn's context; a malformed turn restarts the chain.
    std::string previous = prompt.text;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = one(i, make_prompt(previous));
      previous = out[i].usable() ? out[i].parsed->utterance : std::string{};
    }
    return out;
  }

  std::vector<std::vector<int>> cycle;
  if (prompt.kind == PromptMode::Kind::LabelCycle) {
    if (prompt.labels.empty()) throw std::invalid_argument("label cycle without labels");
    for (const auto& l : prompt.labels) cycle.push_back(make_prompt(l));
  }
  const auto fixed = make_prompt(prompt.kind == PromptMode::Kind::Labeled ? prompt.text : std::string{});
  auto prompt_tokens = [&](std::size_t i) -> const std::vector<int>& {
    return cycle.empty() ? fixed : cycle[(first_id + i) % cycle.size()];
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, config_.workers)), 1, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = one(i, prompt_tokens(i));
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = one(i, prompt_tokens(i));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

UpdateStats Generator::ppo_update(const std::vector<GeneratedDatapoint>& batch, KLController& controller, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("empty generator update batch");
  std::vector<double> r_d;
  std::vector<bool> malformed;
  UpdateStats st;
  for (const auto& d : batch) {
    if (!d.reward) throw std::invalid_argument("datapoint without reward in generator update");
    r_d.push_back(d.reward->r_d);
    malformed.push_back(!d.usable());
    st.mean_reward += d.reward->final_reward;
  }
  st.mean_reward /= static_cast<double>(batch.size());
  const auto terminal = whiten_with_floor(r_d, malformed);

  std::vector<PolicySample> samples;
  samples.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& d = batch[i];
    if (d.generated_tokens.empty()) continue;
    samples.push_back({d.prompt_tokens, d.generated_tokens, d.token_logprobs_policy, d.token_logprobs_reference,
                       terminal[i]});
  }
  auto snapshot = policy_->clone();
  const auto ps = gcn::ppo_update(*policy_, samples, config_.ppo, controller.beta, rng);
  if (ps.aborted) policy_ = std::move(snapshot);
  st.mean_kl = ps.mean_kl;
  st.clip_fraction = ps.clip_fraction;
  st.policy_loss = ps.policy_loss;
  st.updates = ps.updates;
  st.aborted = ps.aborted;
  st.beta_before = controller.beta;
  controller = update_beta(controller, ps.mean_kl, static_cast<double>(batch.size()));
  st.beta_after = controller.beta;
  return st;
}

void Generator::advance_unfreeze(int i_meta) {
  const std::size_t want = config_.unfreeze.groups_at(i_meta, policy_->parameter_group_count());
  policy_->set_trainable_groups(std::max(want, policy_->trainable_groups()));
}

void Generator::sync_reference() {
  switch (config_.sync_mode) {
    case SyncMode::PolicyToReference: reference_ = policy_->clone(); break;
    case SyncMode::ReferenceToPolicy: {
      const std::size_t groups = policy_->trainable_groups();
      policy_ = reference_->clone();
      policy_->set_trainable_groups(groups);
      break;
    }
    case SyncMode::Disabled: break;
  }
}

namespace {

nlohmann::json config_to_json(const GeneratorConfig& c) {
  return {{"temperature", c.sampler.temperature},
          {"top_k", c.sampler.top_k},
          {"top_p", c.sampler.top_p},
          {"max_new_tokens", c.sampler.max_new_tokens},
          {"ppo_epochs", c.ppo.epochs},
          {"ppo_clip_ratio", c.ppo.clip_ratio},
          {"ppo_learning_rate", c.ppo.learning_rate},
          {"ppo_minibatch_size", c.ppo.minibatch_size},
          {"ppo_value_baseline", c.ppo.value_baseline},
          {"ppo_value_coef", c.ppo.value_coef},
          {"unfreeze_initial_groups", c.unfreeze.initial_groups},
          {"unfreeze_every", c.unfreeze.every},
          {"sync_mode", std::string(to_string(c.sync_mode))},
          {"sync_every", c.sync_every},
          {"pretrain_steps", c.pretrain_steps},
          {"pretrain_batch_size", c.pretrain_batch_size},
          {"pretrain_learning_rate", c.pretrain_learning_rate},
          {"allow_cold_start", c.allow_cold_start},
          {"workers", c.workers}};
}

GeneratorConfig config_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.sampler.temperature = j.at("temperature");
  c.sampler.top_k = j.at("top_k");
  c.sampler.top_p = j.at("top_p");
  c.sampler.max_new_tokens = j.at("max_new_tokens");
  c.ppo.epochs = j.at("ppo_epochs");
  c.ppo.clip_ratio = j.at("ppo_clip_ratio");
  c.ppo.learning_rate = j.at("ppo_learning_rate");
  c.ppo.minibatch_size = j.at("ppo_minibatch_size");
  c.ppo.value_baseline = j.at("ppo_value_baseline");
  c.ppo.value_coef = j.at("ppo_value_coef");
  c.unfreeze.initial_groups = j.at("unfreeze_initial_groups");
  c.unfreeze.every = j.at("unfreeze_every");
  c.sync_mode = parse_sync_mode(j.at("sync_mode").get<std::string>());
  c.sync_every = j.at("sync_every");
  c.pretrain_steps = j.at("pretrain_steps");
  c.pretrain_batch_size = j.at("pretrain_batch_size");
  c.pretrain_learning_rate = j.at("pretrain_learning_rate");
  c.allow_cold_start = j.at("allow_cold_start");
  c.workers = j.at("workers");
  return c;
}

}  // namespace

void Generator::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  policy_->save(dir / "policy");
  reference_->save(dir / "reference");
  nlohmann::json j;
  j["config"] = config_to_json(config_);
  j["separators"] = {separators_.bos, separators_.go, separators_.eos};
  j["task"] = std::string(to_string(task_));
  j["slot_phrases"] = std::vector<std::string>(slot_phrases_.begin(), slot_phrases_.end());
  j["trainable_groups"] = policy_->trainable_groups();
  j["pretrained"] = pretrained_;
  std::ofstream out(dir / "generator.json");
  if (!out) throw std::runtime_error("cannot write generator checkpoint in " + dir.string());
  out << j.dump(2) << '\n';
}

Generator Generator::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "generator.json");
  if (!in) throw std::runtime_error("missing generator.json in " + dir.string());
  const auto j = nlohmann::json::parse(in);
  const auto seps = j.at("separators").get<std::vector<std::string>>();
  if (seps.size() != 3) throw std::runtime_error("bad separators in generator checkpoint");
  const auto phrases = j.at("slot_phrases").get<std::vector<std::string>>();
  Generator g(load_backend(dir / "policy"), config_from_json(j.at("config")), SeparatorSet{seps[0], seps[1], seps[2]},
              parse_task_kind(j.at("task").get<std::string>()),
              std::set<std::string>(phrases.begin(), phrases.end()));
  g.reference_ = load_backend(dir / "reference");
  g.policy_->set_trainable_groups(j.at("trainable_groups").get<std::size_t>());
  g.pretrained_ = j.at("pretrained").get<bool>();
  return g;
}

}  // namespace gcn
