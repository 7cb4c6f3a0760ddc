#include "gcn/commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include "gcn/fixture.hpp"
#include "gcn/keyvalue.hpp"
#include "gcn/run_log.hpp"
#include "json.hpp"

namespace gcn::commands {

using nlohmann::json;

std::filesystem::path sample(const std::string& manifest, double percent, std::uint64_t seed,
                             const std::filesystem::path& out_dir) {
  if (!(percent > 0.0 && percent <= 100.0)) throw ConfigError("fraction must be a percentage in (0, 100]");
  DatasetManifest m;
  Corpus train_c, val_c;
  bool has_val = false;
  const std::string prefix = "builtin:";
  std::filesystem::create_directories(out_dir);
  if (manifest.rfind(prefix, 0) == 0) {
    TaskKind task;
    try {
      task = parse_task_kind(manifest.substr(prefix.size()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const auto full = fixture::write(out_dir / "source", task);
    m = DatasetManifest::load(full);
  } else {
    if (!std::filesystem::exists(manifest)) throw ConfigError("manifest not found: " + manifest);
    m = DatasetManifest::load(manifest);
  }
  train_c = load(m.train, m.task, SplitTag::SeedTrain, m.slot_phrases);
  if (m.validation) {
    val_c = load(*m.validation, m.task, SplitTag::Validation, m.slot_phrases);
    has_val = true;
  }
  const auto tr = stratified_sample(train_c, SampleSpec{percent, seed, 1});
  write_jsonl(tr.corpus, out_dir / "train.jsonl");
  DatasetManifest out = m;
  out.train = std::filesystem::absolute(out_dir / "train.jsonl");
  out.test = std::filesystem::absolute(m.test);
  json prov{{"source_manifest", manifest}, {"fraction_percent", percent}, {"seed", seed}};
  auto classes = [](const SampleResult& r) {
    json a = json::array();
    for (const auto& c : r.classes)
      a.push_back({{"class", c.cls}, {"available", c.available}, {"drawn", c.drawn}, {"min_rule_bound", c.min_rule_bound}});
    return a;
  };
  prov["train"] = {{"size", tr.corpus.size()}, {"classes", classes(tr)}};
  if (has_val) {
    const auto va = stratified_sample(val_c, SampleSpec{percent, derive_seed(seed, 1), 1});
    write_jsonl(va.corpus, out_dir / "validation.jsonl");
    out.validation = std::filesystem::absolute(out_dir / "validation.jsonl");
    prov["validation"] = {{"size", va.corpus.size()}, {"classes", classes(va)}};
  }
  const auto mpath = out_dir / "manifest.txt";
  out.save(mpath);
  write_file(out_dir / "provenance.json", prov.dump(2) + "\n");
  return mpath;
}

TrainOutcome train(const RunConfig& config, std::ostream* progress) {
  const auto t0 = std::chrono::steady_clock::now();
  TrainOutcome outcome;
  outcome.run_dir = config.output_dir;
  std::filesystem::create_directories(config.output_dir);
  write_file(config.output_dir / "config.txt", echo_config(config));
  if (!config.options.resume) {
    for (const char* f : {"events.jsonl", "rewards.jsonl"}) std::filesystem::remove(config.output_dir / f);
    std::filesystem::remove_all(config.output_dir / "checkpoints");
  }
  std::string dataset_name;
  for (std::uint64_t s : config.options.meta.seeds) {
    const Datasets d = prepare_datasets(config, s);
    dataset_name = d.name;
    for (RunMode mode : config.modes) {
      RunOptions o = config.options;
      o.mode = mode;
      o.seed = s;
      o.run_dir = config.output_dir;
      if (progress)
        *progress << "run " << to_string(mode) << " seed " << s << " (seed examples: " << d.seed.size() << ")"
                  << std::endl;
      auto r = run(o, d.seed, d.validation, d.test, &d.full_train);
      if (progress)
        *progress << "  test " << r.metric_name << " = " << r.test_metric << " in " << r.seconds << " s"
                  << (r.degenerate ? " [degenerate]" : "") << std::endl;
      outcome.degenerate = outcome.degenerate || r.degenerate;
      outcome.runs.push_back(std::move(r));
    }
  }
  outcome.ordering = check_ordering(outcome.runs);
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto doc = build_report_json(config, dataset_name, outcome.runs, total);
  write_file(config.output_dir / "report.json", doc);
  write_file(config.output_dir / "report.csv", render_csv(doc));
  for (const auto& [name, svg] : render_plots(doc)) write_file(config.output_dir / "plots" / name, svg);
  return outcome;
}

std::filesystem::path resolve_generator_dir(const std::filesystem::path& path) {
  if (std::filesystem::exists(path / "generator.json")) return path;
  if (std::filesystem::exists(path / "generator" / "generator.json")) return path / "generator";
  // A run directory: latest checkpoint of the first tagged run.
  const auto root = path / "checkpoints";
  if (std::filesystem::exists(root)) {
    std::optional<std::filesystem::path> best;
    for (const auto& tag : std::filesystem::directory_iterator(root)) {
      for (const auto& meta : std::filesystem::directory_iterator(tag.path())) {
        if (!std::filesystem::exists(meta.path() / "generator" / "generator.json")) continue;
        if (!best || meta.path() > *best) best = meta.path();
      }
      if (best) return *best / "generator";
    }
  }
  throw ConfigError("no generator checkpoint under " + path.string());
}

void generate(const std::filesystem::path& checkpoint, std::size_t n, std::uint64_t seed,
              const std::optional<std::string>& label, std::ostream& out) {
  const Generator g = Generator::load(resolve_generator_dir(checkpoint));
  const PromptMode prompt = label ? PromptMode::labeled(*label)
                                  : (g.task() == TaskKind::DialogueResponse ? PromptMode::dialogue_chain()
                                                                            : PromptMode::unconditional());
  for (const auto& d : g.generate_batch(n, prompt, seed, -1, 0)) {
    json j{{"id", d.id}, {"raw_text", d.raw_text}, {"usable", d.usable()}};
    if (d.parsed) {
      j["label"] = d.parsed->label;
      j["utterance"] = d.parsed->utterance;
      if (d.parsed->iob_tags) j["iob_tags"] = *d.parsed->iob_tags;
    }
    if (d.rejection) j["rejection"] = *d.rejection;
    out << j.dump() << '\n';
  }
}

FinalEvaluation evaluate(const std::filesystem::path& checkpoint, const RunConfig& config, std::uint64_t seed) {
  const Generator g = Generator::load(resolve_generator_dir(checkpoint));
  const Datasets d = prepare_datasets(config, seed);
  if (d.task != g.task()) throw ConfigError("checkpoint task does not match the dataset");
  RunOptions o = config.options;
  o.seed = seed;
  return final_evaluation(o, g, LabelSpace::from_corpus(d.seed), d.seed, d.test);
}

std::vector<std::string> read_utterances(const std::filesystem::path& path) {
  std::vector<std::string> out;
  const bool jsonl = path.extension() == ".jsonl";
  for (const auto& line : read_lines(path)) {
    if (!jsonl) {
      out.push_back(line);
      continue;
    }
    const auto j = json::parse(line);
    if (j.contains("utterance")) {
      out.push_back(j.at("utterance").get<std::string>());
    } else if (j.contains("text")) {
      out.push_back(j.at("text").get<std::string>());
    } else if (j.contains("turns")) {
      for (const auto& t : j.at("turns")) out.push_back(t.get<std::string>());
    } else {
      throw ConfigError("no utterance field in " + path.string());
    }
  }
  return out;
}

CreativityReport creativity(const std::filesystem::path& generated, const std::filesystem::path& seed,
                            const std::filesystem::path& train, const std::filesystem::path& test) {
  return analyze(read_utterances(generated), read_utterances(seed), read_utterances(train), read_utterances(test));
}

std::string creativity_json(const CreativityReport& r) {
  return json{{"seed_em", r.seed_em},
              {"train_em", r.train_em},
              {"self_bleu", r.self_bleu},
              {"oov_rate", r.oov_rate},
              {"vocab_size", r.vocab_size}}
      .dump(2);
}

void report(const std::filesystem::path& run_dir, const std::string& format, std::ostream& out) {
  const auto path = run_dir / "report.json";
  if (!std::filesystem::exists(path)) throw ConfigError("incomplete run directory (no report.json): " + run_dir.string());
  const std::string doc = read_file(path);
  if (format == "json") {
    out << doc;
  } else if (format == "csv") {
    const auto csv = render_csv(doc);
    write_file(run_dir / "report.csv", csv);
    out << csv;
  } else if (format == "plots") {
    for (const auto& [name, svg] : render_plots(doc)) {
      write_file(run_dir / "plots" / name, svg);
      out << (run_dir / "plots" / name).string() << '\n';
    }
  } else {
    throw ConfigError("unknown report format: " + format);
  }
}

std::filesystem::path fixture(const std::filesystem::path& out_dir, TaskKind task, std::uint64_t seed) {
  return fixture::write(out_dir, task, seed);
}

}  // namespace gcn::commands
