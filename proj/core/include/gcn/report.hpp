#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcn/metaloop.hpp"
#include "gcn/run_config.hpp"

namespace gcn {

double median(std::vector<double> values);

struct OrderingCheck {
  double margin = 0.03;
  std::optional<bool> plus_beats_baseline;  // median(plus) >= median(baseline) + margin
  std::optional<bool> plus_beats_minus;     // median(plus) >= median(minus)
  std::optional<bool> minus_beats_baseline;  // median(minus) >= median(baseline)
};

OrderingCheck check_ordering(const std::vector<FinalReport>& runs, double margin = 0.03);

// Aggregate document written to <run_dir>/report.json: config, per-run metric and
// creativity blocks, per-mode medians, the ordering check and wall-clock timings.
std::string build_report_json(const RunConfig& config, const std::string& dataset_name,
                              const std::vector<FinalReport>& runs, double total_seconds);

// Rows keyed (dataset, fraction, mode, metric) with the median over seeds.
std::string render_csv(const std::string& report_json);

// Static SVG images: reward_curve.svg and oov_vocab.svg.
std::map<std::string, std::string> render_plots(const std::string& report_json);

}  // namespace gcn
