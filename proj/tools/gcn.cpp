#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gcn/commands.hpp"
#include "gcn/keyvalue.hpp"

namespace {

std::map<std::string, std::string> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw gcn::ConfigError("--set expects key=value, got: " + s);
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

gcn::RunConfig config_from(const std::string& path, std::map<std::string, std::string> overrides) {
  if (path.empty()) return gcn::parse_run_config(overrides);
  return gcn::load_run_config(path, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative conversational networks: RL-trained data generation for NLU"};
  app.require_subcommand(1);

  std::string manifest, out_dir, config_path, checkpoint, label, format = "json", run_dir, condition = "generated";
  std::string generated_path, seed_path, train_path, test_path, task = "intent";
  double fraction = 0.0;
  std::uint64_t seed = 1;
  std::size_t count = 10;
  std::vector<std::string> sets;
  bool quiet = false;

  auto* sample = app.add_subcommand("sample", "write a stratified percentage sample of a dataset");
  sample->add_option("--manifest", manifest, "manifest path or builtin:<task>")->required();
  sample->add_option("--fraction", fraction, "percentage of each class to keep, in (0, 100]")->required();
  sample->add_option("--seed", seed, "sampling seed");
  sample->add_option("--out", out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train", "run the meta-loop for every configured mode and seed");
  train->add_option("--config", config_path, "key-value config file (defaults when omitted)");
  train->add_option("--set", sets, "override a config key: key=value (repeatable)");
  train->add_option("--output-dir", out_dir, "override output_dir");
  train->add_flag("--quiet", quiet, "no progress output");

  auto* generate = app.add_subcommand("generate", "sample datapoints from a generator checkpoint");
  generate->add_option("--checkpoint", checkpoint, "run dir, meta_XXX dir or generator dir")->required();
  generate->add_option("--count", count, "number of datapoints");
  generate->add_option("--seed", seed, "sampling seed");
  generate->add_option("--label", label, "prompt with this label");
  generate->add_option("--out", out_dir, "output .jsonl (stdout when omitted)");

  auto* evaluate = app.add_subcommand("evaluate", "train a fresh learner on checkpoint data and test it");
  evaluate->add_option("--checkpoint", checkpoint, "run dir, meta_XXX dir or generator dir")->required();
  evaluate->add_option("--config", config_path, "key-value config file");
  evaluate->add_option("--set", sets, "override a config key: key=value (repeatable)");
  evaluate->add_option("--seed", seed, "run seed");

  auto* creativity = app.add_subcommand("creativity", "EM, Self-BLEU, OOV rate and vocabulary size");
  creativity->add_option("--generated", generated_path, "generated utterances (.jsonl or text)")->required();
  creativity->add_option("--seed-data", seed_path, "seed utterances")->required();
  creativity->add_option("--train-data", train_path, "full training utterances")->required();
  creativity->add_option("--test-data", test_path, "test utterances")->required();
  creativity->add_option("--format", format, "json | csv");
  creativity->add_option("--condition", condition, "row name for csv output");

  auto* report = app.add_subcommand("report", "render report.json as json, csv or plots");
  report->add_option("--run-dir", run_dir, "run directory")->required();
  report->add_option("--format", format, "json | csv | plots");

  auto* fixture = app.add_subcommand("fixture", "write the built-in synthetic dataset");
  fixture->add_option("--out", out_dir, "output directory")->required();
  fixture->add_option("--task", task, "intent | slot | dialogue");
  fixture->add_option("--seed", seed, "generation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gcn::commands::kConfigError;
  }

  try {
    if (*sample) {
      std::cout << gcn::commands::sample(manifest, fraction, seed, out_dir).string() << '\n';
    } else if (*train) {
      auto overrides = parse_sets(sets);
      if (!out_dir.empty()) overrides["output_dir"] = out_dir;
      const auto cfg = config_from(config_path, overrides);
      const auto outcome = gcn::commands::train(cfg, quiet ? nullptr : &std::cerr);
      std::cout << (outcome.run_dir / "report.json").string() << '\n';
      if (outcome.degenerate) {
        std::cerr << "degenerate run: the generator produced fewer than 50% parseable datapoints\n";
        return gcn::commands::kDegenerate;
      }
    } else if (*generate) {
      const std::optional<std::string> l = label.empty() ? std::nullopt : std::optional<std::string>(label);
      if (out_dir.empty()) {
        gcn::commands::generate(checkpoint, count, seed, l, std::cout);
      } else {
        std::ofstream out(out_dir);
        if (!out) throw gcn::ConfigError("cannot write " + out_dir);
        gcn::commands::generate(checkpoint, count, seed, l, out);
      }
    } else if (*evaluate) {
      const auto cfg = config_from(config_path, parse_sets(sets));
      const auto fe = gcn::commands::evaluate(checkpoint, cfg, seed);
      std::cout << "{\"test_metric\": " << fe.test_metric << ", \"dataset_size\": " << fe.dataset_size
                << ", \"parse_rate\": " << fe.parse_rate << ", \"usable_rate\": " << fe.usable_rate
                << ", \"degenerate\": " << (fe.degenerate ? "true" : "false") << "}\n";
      if (fe.degenerate) return gcn::commands::kDegenerate;
    } else if (*creativity) {
      const auto r = gcn::commands::creativity(generated_path, seed_path, train_path, test_path);
      if (format == "csv") {
        std::cout << gcn::creativity_csv_header() << '\n' << gcn::creativity_csv_row(condition, r) << '\n';
      } else if (format == "json") {
        std::cout << gcn::commands::creativity_json(r) << '\n';
      } else {
        throw gcn::ConfigError("unknown creativity format: " + format);
      }
    } else if (*report) {
      gcn::commands::report(run_dir, format, std::cout);
    } else if (*fixture) {
      gcn::TaskKind kind;
      try {
        kind = gcn::parse_task_kind(task);
      } catch (const std::invalid_argument& e) {
        throw gcn::ConfigError(e.what());
      }
      std::cout << gcn::commands::fixture(out_dir, kind, seed).string() << '\n';
    }
  } catch (const gcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gcn::commands::kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gcn::commands::kRuntimeAbort;
  }
  return gcn::commands::kOk;
}
