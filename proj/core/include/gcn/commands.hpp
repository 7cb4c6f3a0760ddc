#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gcn/creativity.hpp"
#include "gcn/metaloop.hpp"
#include "gcn/report.hpp"
#include "gcn/run_config.hpp"

// Library side of the command-line tool; the executable only parses arguments.
namespace gcn::commands {

enum ExitCode : int { kOk = 0, kConfigError = 2, kRuntimeAbort = 3, kDegenerate = 4 };

// Stratified sample of the manifest's training split (and validation, if present) written
// next to a manifest that points at the original test file, plus provenance.json.
// `manifest` may be builtin:<task>. Returns the new manifest path.
std::filesystem::path sample(const std::string& manifest, double percent, std::uint64_t seed,
                             const std::filesystem::path& out_dir);

struct TrainOutcome {
  std::filesystem::path run_dir;
  std::vector<FinalReport> runs;
  OrderingCheck ordering;
  bool degenerate = false;
};

// All modes x seeds of the config into config.output_dir: config.txt, events.jsonl,
// rewards.jsonl, checkpoints/, report.json, report.csv and plots/.
TrainOutcome train(const RunConfig& config, std::ostream* progress = nullptr);

// Resolves a run directory, meta_XXX directory or generator directory to the generator directory.
std::filesystem::path resolve_generator_dir(const std::filesystem::path& path);

// Samples n datapoints from a checkpoint as JSON lines.
void generate(const std::filesystem::path& checkpoint, std::size_t n, std::uint64_t seed,
              const std::optional<std::string>& label, std::ostream& out);

// Fresh learner on data generated by the checkpoint, evaluated on the config's test split.
FinalEvaluation evaluate(const std::filesystem::path& checkpoint, const RunConfig& config, std::uint64_t seed);

// Reads utterances from a .jsonl file ("text" or "utterance" field) or one per line.
std::vector<std::string> read_utterances(const std::filesystem::path& path);

CreativityReport creativity(const std::filesystem::path& generated, const std::filesystem::path& seed,
                            const std::filesystem::path& train, const std::filesystem::path& test);
std::string creativity_json(const CreativityReport& report);

// format: json | csv | plots. Writes report.csv / plots/*.svg into the run directory and
// prints the rendered text (or the plot paths).
void report(const std::filesystem::path& run_dir, const std::string& format, std::ostream& out);

std::filesystem::path fixture(const std::filesystem::path& out_dir, TaskKind task, std::uint64_t seed);

}  // namespace gcn::commands
