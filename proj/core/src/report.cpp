#include "gcn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gcn {

using nlohmann::json;

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

std::optional<double> mode_median(const std::vector<FinalReport>& runs, RunMode mode) {
  std::vector<double> v;
  for (const auto& r : runs)
    if (r.mode == mode) v.push_back(r.test_metric);
  if (v.empty()) return std::nullopt;
  return median(v);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

OrderingCheck check_ordering(const std::vector<FinalReport>& runs, double margin) {
  OrderingCheck c;
  c.margin = margin;
  const auto base = mode_median(runs, RunMode::Baseline);
  const auto minus = mode_median(runs, RunMode::GcnMinusRl);
  const auto plus = mode_median(runs, RunMode::GcnPlusRl);
  if (plus && base) c.plus_beats_baseline = *plus >= *base + margin - 1e-12;
  if (plus && minus) c.plus_beats_minus = *plus >= *minus;
  if (minus && base) c.minus_beats_baseline = *minus >= *base;
  return c;
}

std::string build_report_json(const RunConfig& config, const std::string& dataset_name,
                              const std::vector<FinalReport>& runs, double total_seconds) {
  json j;
  j["dataset"] = dataset_name;
  j["task"] = std::string(to_string(config.task));
  j["sample_percent"] = config.sample_percent;
  j["metric"] = metric_name(config.task);
  json cfg = json::object();
  {
    std::istringstream in(echo_config(config));
    for (std::string line; std::getline(in, line);) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) cfg[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  j["config"] = cfg;

  json jruns = json::array();
  json timings = json::object();
  for (const auto& r : runs) {
    json jr;
    jr["mode"] = std::string(to_string(r.mode));
    jr["seed"] = r.seed;
    jr["metrics"] = {{"name", r.metric_name},
                     {"test", r.test_metric},
                     {"best_p_meta", r.best_p_meta},
                     {"final_dataset_size", r.final_dataset_size},
                     {"final_parse_rate", r.final_parse_rate},
                     {"final_usable_rate", r.final_usable_rate},
                     {"degenerate", r.degenerate},
                     {"early_stopped", r.early_stopped},
                     {"meta_iterations_run", r.history.size()}};
    if (r.creativity) {
      jr["creativity"] = {{"seed_em", r.creativity->seed_em},
                          {"train_em", r.creativity->train_em},
                          {"self_bleu", r.creativity->self_bleu},
                          {"oov_rate", r.creativity->oov_rate},
                          {"vocab_size", r.creativity->vocab_size}};
    } else {
      jr["creativity"] = nullptr;
    }
    json hist = json::array();
    for (const auto& h : r.history)
      hist.push_back({{"i_meta", h.i_meta},
                      {"p_meta", h.p_meta},
                      {"mean_reward", h.mean_reward},
                      {"mean_r_d", h.mean_r_d},
                      {"mean_kl", h.mean_kl},
                      {"beta", h.beta},
                      {"seed_fraction", h.seed_fraction},
                      {"parse_rate", h.parse_rate},
                      {"usable_rate", h.usable_rate}});
    jr["history"] = hist;
    jruns.push_back(jr);
    timings[checkpoint_tag(r.mode, r.seed)] = r.seconds;
  }
  timings["total"] = total_seconds;
  j["runs"] = jruns;

  json summary = json::object();
  for (RunMode m : {RunMode::Baseline, RunMode::GcnMinusRl, RunMode::GcnPlusRl}) {
    std::vector<double> v;
    for (const auto& r : runs)
      if (r.mode == m) v.push_back(r.test_metric);
    if (!v.empty()) summary[std::string(to_string(m))] = {{"median", median(v)}, {"values", v}};
  }
  j["summary"] = summary;
  const auto oc = check_ordering(runs);
  auto opt = [](const std::optional<bool>& b) { return b ? json(*b) : json(nullptr); };
  j["ordering"] = {{"margin", oc.margin},
                   {"plus_beats_baseline", opt(oc.plus_beats_baseline)},
                   {"plus_beats_minus", opt(oc.plus_beats_minus)},
                   {"minus_beats_baseline", opt(oc.minus_beats_baseline)}};
  j["timings_seconds"] = timings;
  return j.dump(2) + "\n";
}

std::string render_csv(const std::string& report_json) {
  const auto j = json::parse(report_json);
  const std::string dataset = j.at("dataset");
  const double fraction = j.at("sample_percent");
  const std::string metric = j.at("metric");
  std::ostringstream out;
  out << "dataset,fraction,mode,metric,value\n";
  std::map<std::string, std::map<std::string, std::vector<double>>> by_mode;  // mode -> metric -> values
  std::vector<std::string> mode_order;
  for (const auto& r : j.at("runs")) {
    const std::string mode = r.at("mode");
    if (!by_mode.count(mode)) mode_order.push_back(mode);
    auto& m = by_mode[mode];
    m[metric].push_back(r.at("metrics").at("test"));
    if (!r.at("creativity").is_null()) {
      for (const char* k : {"seed_em", "train_em", "self_bleu", "oov_rate", "vocab_size"})
        m[k].push_back(r.at("creativity").at(k).get<double>());
    }
  }
  static const std::vector<std::string> order = {"baseline", "gcn_minus_rl", "gcn_plus_rl"};
  std::sort(mode_order.begin(), mode_order.end(), [](const std::string& a, const std::string& b) {
    return std::find(order.begin(), order.end(), a) < std::find(order.begin(), order.end(), b);
  });
  for (const auto& mode : mode_order) {
    const auto& m = by_mode[mode];
    std::vector<std::string> keys{metric, "seed_em", "train_em", "self_bleu", "oov_rate", "vocab_size"};
    for (const auto& k : keys) {
      auto it = m.find(k);
      if (it == m.end()) continue;
      char frac[32];
      std::snprintf(frac, sizeof frac, "%g", fraction);
      out << dataset << ',' << frac << ',' << mode << ',' << k << ',' << num(median(it->second)) << '\n';
    }
  }
  return out.str();
}

namespace {

// Minimal line/bar chart writer.
class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
         << w << ' ' << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void text(double x, double y, const std::string& s, int size = 12, const char* anchor = "start") {
    out_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-family=\"sans-serif\" font-size=\"" << size
         << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& color = "black") {
    out_ << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2 << "\" stroke=\"" << color
         << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
    out_ << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << color << "\" points=\"";
    for (const auto& [x, y] : pts) out_ << x << ',' << y << ' ';
    out_ << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& color) {
    out_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h << "\" fill=\"" << color
         << "\"/>\n";
  }
  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  static std::string escape(const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else o += c;
    }
    return o;
  }
  double w_, h_;
  std::ostringstream out_;
};

const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"};

struct Frame {
  double left = 60, right = 20, top = 40, bottom = 50, width = 640, height = 360;
  double x0() const { return left; }
  double x1() const { return width - right; }
  double y0() const { return height - bottom; }
  double y1() const { return top; }
};

void axes(Svg& svg, const Frame& f, double ymin, double ymax, const std::string& xlabel, const std::string& ylabel) {
  svg.line(f.x0(), f.y0(), f.x1(), f.y0());
  svg.line(f.x0(), f.y0(), f.x0(), f.y1());
  for (int i = 0; i <= 4; ++i) {
    const double v = ymin + (ymax - ymin) * i / 4.0;
    const double y = f.y0() - (f.y0() - f.y1()) * i / 4.0;
    svg.line(f.x0() - 4, y, f.x0(), y);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    svg.text(f.x0() - 6, y + 4, buf, 10, "end");
  }
  svg.text((f.x0() + f.x1()) / 2, f.height - 12, xlabel, 12, "middle");
  svg.text(14, f.top - 12, ylabel, 12, "start");
}

}  // namespace

std::map<std::string, std::string> render_plots(const std::string& report_json) {
  const auto j = json::parse(report_json);
  std::map<std::string, std::string> out;

  {
    Frame f;
    Svg svg(f.width, f.height);
    svg.text(f.width / 2, 20, "Mean datapoint reward per meta-iteration (" + j.at("dataset").get<std::string>() + ")", 14,
             "middle");
    double ymin = 0.0, ymax = 0.0;
    int max_iter = 1;
    for (const auto& r : j.at("runs")) {
      for (const auto& h : r.at("history")) {
        const double v = h.at("mean_reward");
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
        max_iter = std::max(max_iter, h.at("i_meta").get<int>());
      }
    }
    if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
    axes(svg, f, ymin, ymax, "meta-iteration", "mean reward");
    int k = 0;
    for (const auto& r : j.at("runs")) {
      if (r.at("history").empty()) continue;
      std::vector<std::pair<double, double>> pts;
      for (const auto& h : r.at("history")) {
        const double x = f.x0() + (f.x1() - f.x0()) * h.at("i_meta").get<double>() / max_iter;
        const double y = f.y0() - (f.y0() - f.y1()) * (h.at("mean_reward").get<double>() - ymin) / (ymax - ymin);
        pts.emplace_back(x, y);
      }
      const std::string color = kPalette[k % 8];
      svg.polyline(pts, color);
      svg.text(f.x1() - 150, f.y1() + 14 * (k + 1), r.at("mode").get<std::string>() + " seed " +
                                                         std::to_string(r.at("seed").get<std::uint64_t>()),
               10);
      svg.rect(f.x1() - 162, f.y1() + 14 * (k + 1) - 8, 8, 8, color);
      ++k;
    }
    out["reward_curve.svg"] = svg.finish();
  }

  {
    Frame f;
    Svg svg(f.width, f.height);
    svg.text(f.width / 2, 20, "Unigram OOV rate (bars) and vocabulary size (labels) of generated data", 14, "middle");
    std::vector<std::tuple<std::string, double, double>> bars;
    for (const auto& r : j.at("runs")) {
      if (r.at("creativity").is_null()) continue;
      bars.emplace_back(r.at("mode").get<std::string>() + "/" + std::to_string(r.at("seed").get<std::uint64_t>()),
                        r.at("creativity").at("oov_rate").get<double>(),
                        r.at("creativity").at("vocab_size").get<double>());
    }
    axes(svg, f, 0.0, 1.0, "run (mode/seed)", "OOV rate");
    const double slot = bars.empty() ? 1.0 : (f.x1() - f.x0()) / static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
      const auto& [name, oov, vocab] = bars[i];
      const double x = f.x0() + slot * static_cast<double>(i) + slot * 0.15;
      const double h = (f.y0() - f.y1()) * oov;
      svg.rect(x, f.y0() - h, slot * 0.7, std::max(h, 0.5), kPalette[i % 8]);
      svg.text(x + slot * 0.35, f.y0() - h - 4, "V=" + std::to_string(static_cast<long long>(vocab)), 10, "middle");
      svg.text(x + slot * 0.35, f.y0() + 14, name, 9, "middle");
    }
    out["oov_vocab.svg"] = svg.finish();
  }
  return out;
}

}  // namespace gcn
