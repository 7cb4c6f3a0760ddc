#include "gcn/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "gcn/fixture.hpp"
#include "gcn/text.hpp"

namespace gcn {

namespace {

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }
template <typename T>
std::string fmt_int(T v) {
  return std::to_string(v);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto s = std::string(trim(v));
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(key + ": not a number: " + v);
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto s = std::string(trim(v));
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(key + ": not an integer: " + v);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto s = std::string(trim(v));
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(key + ": not an unsigned integer: " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const auto s = normalize_text(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": not a boolean: " + v);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v + ",") {
    if (c == ',') {
      auto t = std::string(trim(cur));
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

struct Entry {
  ConfigKey key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

#define GCN_INT(field) [](const RunConfig& c) { return fmt_int(c.field); }, \
  [](RunConfig& c, const std::string& v) { c.field = static_cast<decltype(c.field)>(to_int(#field, v)); }
#define GCN_DBL(field) [](const RunConfig& c) { return fmt(static_cast<double>(c.field)); }, \
  [](RunConfig& c, const std::string& v) { c.field = to_double(#field, v); }
#define GCN_BOOL(field) [](const RunConfig& c) { return fmt(static_cast<bool>(c.field)); }, \
  [](RunConfig& c, const std::string& v) { c.field = to_bool(#field, v); }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"task", "intent | slot | dialogue (default: from the manifest)"},
       [](const RunConfig& c) { return std::string(to_string(c.task)); },
       [](RunConfig& c, const std::string& v) {
         try {
           c.task = parse_task_kind(std::string(trim(v)));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(std::string("task: ") + e.what());
         }
       }},
      {{"manifest", "dataset manifest path, or builtin:intent|slot|dialogue"},
       [](const RunConfig& c) { return c.manifest; },
       [](RunConfig& c, const std::string& v) { c.manifest = std::string(trim(v)); }},
      {{"dataset_name", "name used in CSV rows (default: derived from the manifest)"},
       [](const RunConfig& c) { return c.dataset_name; },
       [](RunConfig& c, const std::string& v) { c.dataset_name = std::string(trim(v)); }},
      {{"sample_percent", "percentage of the training data used as seed, in (0, 100]"}, GCN_DBL(sample_percent)},
      {{"sample_seed", "seed of the stratified sample; 'run' samples with each run seed"},
       [](const RunConfig& c) { return c.sample_seed ? std::to_string(*c.sample_seed) : std::string("run"); },
       [](RunConfig& c, const std::string& v) {
         if (trim(v) == "run") {
           c.sample_seed.reset();
         } else {
           c.sample_seed = to_u64("sample_seed", v);
         }
       }},
      {{"subsample_validation", "sample the validation split with the same percentage"}, GCN_BOOL(subsample_validation)},
      {{"mode", "comma list of baseline, gcn_minus_rl, gcn_plus_rl"},
       [](const RunConfig& c) {
         std::string s;
         for (auto m : c.modes) s += (s.empty() ? "" : ",") + std::string(to_string(m));
         return s;
       },
       [](RunConfig& c, const std::string& v) {
         c.modes.clear();
         for (const auto& m : split_list(v)) {
           try {
             c.modes.push_back(parse_run_mode(m));
           } catch (const std::invalid_argument& e) {
             throw ConfigError(std::string("mode: ") + e.what());
           }
         }
         if (c.modes.empty()) throw ConfigError("mode: empty list");
       }},
      {{"seeds", "comma list of run seeds"},
       [](const RunConfig& c) {
         std::string s;
         for (auto x : c.options.meta.seeds) s += (s.empty() ? "" : ",") + std::to_string(x);
         return s;
       },
       [](RunConfig& c, const std::string& v) {
         c.options.meta.seeds.clear();
         for (const auto& x : split_list(v)) c.options.meta.seeds.push_back(to_u64("seeds", x));
       }},
      {{"output_dir", "run directory"},
       [](const RunConfig& c) { return c.output_dir.string(); },
       [](RunConfig& c, const std::string& v) { c.output_dir = std::string(trim(v)); }},
      {{"meta_iterations", "meta-iterations of the outer loop"}, GCN_INT(options.meta.meta_iterations)},
      {{"learner_iterations", "learner iterations per meta-iteration"}, GCN_INT(options.meta.learner_iterations_per_meta)},
      {{"warmup_meta_iterations", "meta-iterations over which seed data is phased out"},
       GCN_INT(options.meta.warmup_meta_iterations)},
      {{"batch_size", "learner batch size / generator batch size"}, GCN_INT(options.meta.generator_batch_size)},
      {{"performance_threshold", "early stop when validation performance reaches it; 0 or 1 disables"},
       GCN_DBL(options.meta.performance_threshold)},
      {{"alpha", "weight of the validation metric in the datapoint reward"}, GCN_DBL(options.meta.alpha)},
      {{"kl_beta", "initial KL coefficient"}, GCN_DBL(options.controller.beta)},
      {{"kl_target", "target KL per datapoint (nats)"}, GCN_DBL(options.controller.target_kl)},
      {{"kl_horizon", "KL controller horizon"}, GCN_DBL(options.controller.horizon)},
      {{"kl_adaptive", "adapt the KL coefficient"}, GCN_BOOL(options.controller.adaptive)},
      {{"bos", "begin-of-sequence separator"},
       [](const RunConfig& c) { return c.options.separators.bos; },
       [](RunConfig& c, const std::string& v) { c.options.separators.bos = std::string(trim(v)); }},
      {{"go", "label/utterance separator"},
       [](const RunConfig& c) { return c.options.separators.go; },
       [](RunConfig& c, const std::string& v) { c.options.separators.go = std::string(trim(v)); }},
      {{"eos", "end-of-sequence separator"},
       [](const RunConfig& c) { return c.options.separators.eos; },
       [](RunConfig& c, const std::string& v) { c.options.separators.eos = std::string(trim(v)); }},
      {{"temperature", "sampling temperature"}, GCN_DBL(options.generator.sampler.temperature)},
      {{"top_k", "top-k sampling cutoff, 0 disables"}, GCN_INT(options.generator.sampler.top_k)},
      {{"top_p", "nucleus sampling mass, 1 disables"}, GCN_DBL(options.generator.sampler.top_p)},
      {{"max_new_tokens", "maximum generated tokens per datapoint"}, GCN_INT(options.generator.sampler.max_new_tokens)},
      {{"ppo_epochs", "PPO epochs per generator batch"}, GCN_INT(options.generator.ppo.epochs)},
      {{"ppo_clip_ratio", "PPO clip ratio"}, GCN_DBL(options.generator.ppo.clip_ratio)},
      {{"generator_learning_rate", "generator SGD learning rate"}, GCN_DBL(options.generator.ppo.learning_rate)},
      {{"ppo_minibatch_size", "PPO minibatch size"}, GCN_INT(options.generator.ppo.minibatch_size)},
      {{"ppo_value_baseline", "use a value head as advantage baseline"}, GCN_BOOL(options.generator.ppo.value_baseline)},
      {{"ppo_value_coef", "value loss weight"}, GCN_DBL(options.generator.ppo.value_coef)},
      {{"unfreeze_initial_groups", "trainable generator groups at meta-iteration 0"},
       GCN_INT(options.generator.unfreeze.initial_groups)},
      {{"unfreeze_every", "meta-iterations per additional unfrozen group, 0 disables"},
       GCN_INT(options.generator.unfreeze.every)},
      {{"sync_mode", "policy_to_reference | reference_to_policy | disabled"},
       [](const RunConfig& c) { return std::string(to_string(c.options.generator.sync_mode)); },
       [](RunConfig& c, const std::string& v) {
         try {
           c.options.generator.sync_mode = parse_sync_mode(std::string(trim(v)));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(std::string("sync_mode: ") + e.what());
         }
       }},
      {{"sync_every", "meta-iterations between reference syncs, 0 never"}, GCN_INT(options.generator.sync_every)},
      {{"pretrain_steps", "supervised generator steps on the seed"}, GCN_INT(options.generator.pretrain_steps)},
      {{"pretrain_batch_size", "sequences per pretraining step"}, GCN_INT(options.generator.pretrain_batch_size)},
      {{"pretrain_learning_rate", "pretraining learning rate"}, GCN_DBL(options.generator.pretrain_learning_rate)},
      {{"cold_start", "allow an untrained generator when the seed is empty"}, GCN_BOOL(options.generator.allow_cold_start)},
      {{"workers", "sampling threads"}, GCN_INT(options.generator.workers)},
      {{"lm_embedding_dim", "generator embedding width"}, GCN_INT(options.tiny_lm.embedding_dim)},
      {{"lm_context_window", "generator context window (tokens)"}, GCN_INT(options.tiny_lm.context_window)},
      {{"lm_hidden_dim", "generator hidden width"}, GCN_INT(options.tiny_lm.hidden_dim)},
      {{"lm_init_scale", "generator init scale"}, GCN_DBL(options.tiny_lm.init_scale)},
      {{"lm_seed", "generator init stream (mixed with the run seed)"}, GCN_INT(options.tiny_lm.seed)},
      {{"learner_learning_rate", "learner Adam learning rate, 0 uses the task default"}, GCN_DBL(options.learner.learning_rate)},
      {{"learner_hash_buckets", "hashed feature buckets"}, GCN_INT(options.learner.hash_buckets)},
      {{"learner_embedding_dim", "learner embedding width"}, GCN_INT(options.learner.embedding_dim)},
      {{"learner_hidden_dim", "learner hidden width"}, GCN_INT(options.learner.hidden_dim)},
      {{"learner_init_scale", "learner embedding init scale"}, GCN_DBL(options.learner.init_scale)},
      {{"max_generation_rounds", "top-up generation rounds when usable data falls short"}, GCN_INT(options.max_generation_rounds)},
      {{"final_seed_fraction", "share of each final-learner batch taken from the seed"},
       GCN_DBL(options.final_seed_fraction)},
      {{"prompt_scheme", "unconditional | labeled (intent detection only)"},
       [](const RunConfig& c) { return std::string(to_string(c.options.prompt_scheme)); },
       [](RunConfig& c, const std::string& v) {
         try {
           c.options.prompt_scheme = parse_prompt_scheme(std::string(trim(v)));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(std::string("prompt_scheme: ") + e.what());
         }
       }},
      {{"checkpoints", "write per-meta-iteration checkpoints"}, GCN_BOOL(options.write_checkpoints)},
      {{"resume", "continue from the latest checkpoint"}, GCN_BOOL(options.resume)},
  };
  return table;
}

#undef GCN_INT
#undef GCN_DBL
#undef GCN_BOOL

TaskKind task_from_manifest(const std::string& manifest) {
  const std::string prefix = "builtin:";
  try {
    if (manifest.rfind(prefix, 0) == 0) return parse_task_kind(manifest.substr(prefix.size()));
    return DatasetManifest::load(manifest).task;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

RunConfig default_run_config(TaskKind task) {
  RunConfig c;
  c.task = task;
  c.manifest = "builtin:" + std::string(to_string(task));
  c.options.meta = MetaConfig::defaults_for(task);
  return c;
}

RunConfig apply_config(RunConfig base, const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) {
    auto it = std::find_if(entries().begin(), entries().end(), [&](const Entry& e) { return e.key.name == k; });
    if (it == entries().end()) throw ConfigError("unknown configuration key: " + k);
    it->set(base, v);
  }
  try {
    base.options.meta.validate();
    base.options.separators.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(base.sample_percent > 0.0 && base.sample_percent <= 100.0))
    throw ConfigError("sample_percent must be in (0, 100]");
  if (base.options.meta.seeds.empty()) throw ConfigError("seeds: empty list");
  if (base.options.generator.workers < 1) throw ConfigError("workers must be >= 1");
  if (base.options.generator.ppo.value_baseline) base.options.tiny_lm.value_head = true;
  return base;
}

RunConfig parse_run_config(const std::map<std::string, std::string>& values) {
  TaskKind task = TaskKind::IntentDetection;
  auto manifest = values.find("manifest");
  if (auto it = values.find("task"); it != values.end()) {
    try {
      task = parse_task_kind(std::string(trim(it->second)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("task: ") + e.what());
    }
  } else if (manifest != values.end()) {
    task = task_from_manifest(std::string(trim(manifest->second)));
  }
  auto cfg = apply_config(default_run_config(task), values);
  if (manifest != values.end() && task_from_manifest(cfg.manifest) != cfg.task)
    throw ConfigError("task does not match the manifest's task");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides) {
  auto values = read_key_value_file(path);
  // A relative manifest in the file resolves against the file's directory.
  if (auto it = values.find("manifest"); it != values.end()) {
    const std::string m(trim(it->second));
    if (m.rfind("builtin:", 0) != 0 && std::filesystem::path(m).is_relative())
      it->second = (path.parent_path() / m).string();
  }
  for (const auto& [k, v] : overrides) values[k] = v;
  return parse_run_config(values);
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream out;
  for (const auto& e : entries()) {
    out << "# " << e.key.help << '\n';
    out << e.key.name << " = " << e.get(c) << '\n';
  }
  return out.str();
}

Datasets prepare_datasets(const RunConfig& c, std::uint64_t run_seed) {
  Datasets d;
  const std::string prefix = "builtin:";
  if (c.manifest.rfind(prefix, 0) == 0) {
    const TaskKind task = parse_task_kind(c.manifest.substr(prefix.size()));
    if (task != c.task) throw ConfigError("task does not match the builtin dataset");
    auto bundle = fixture::make(task);
    d.task = task;
    d.full_train = std::move(bundle.train);
    d.validation = std::move(bundle.validation);
    d.test = std::move(bundle.test);
    d.name = c.dataset_name.empty() ? "fixture_" + std::string(to_string(task)) : c.dataset_name;
  } else {
    const auto m = DatasetManifest::load(c.manifest);
    if (m.task != c.task) throw ConfigError("task does not match the manifest's task");
    d.task = m.task;
    d.full_train = load(m.train, m.task, SplitTag::SeedTrain, m.slot_phrases);
    d.test = load(m.test, m.task, SplitTag::Test, m.slot_phrases);
    if (m.validation) {
      d.validation = load(*m.validation, m.task, SplitTag::Validation, m.slot_phrases);
    } else {
      auto [tr, va] = split(d.full_train, 0.9, derive_seed(run_seed, 0x5a11));
      d.full_train = std::move(tr);
      d.validation = std::move(va);
    }
    d.name = c.dataset_name.empty() ? std::filesystem::path(c.manifest).parent_path().filename().string()
                                    : c.dataset_name;
    if (d.name.empty()) d.name = "dataset";
  }
  const std::uint64_t sseed = c.sample_seed ? *c.sample_seed : run_seed;
  if (c.sample_percent < 100.0) {
    d.sample = stratified_sample(d.full_train, SampleSpec{c.sample_percent, sseed, 1});
    d.seed = d.sample.corpus;
    if (c.subsample_validation) {
      d.validation = stratified_sample(d.validation, SampleSpec{c.sample_percent, derive_seed(sseed, 1), 1}).corpus;
    }
  } else {
    d.seed = d.full_train;
    d.sample.corpus = d.seed;
  }
  d.seed.split = SplitTag::SeedTrain;
  return d;
}

}  // namespace gcn
