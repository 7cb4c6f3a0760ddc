#include "gcn/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gcn/learner.hpp"

namespace gcn {

namespace {
bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }
}  // namespace

double combine(double p_meta, double p_d, double alpha) {
  if (!in_unit(p_meta) || !in_unit(p_d) || !in_unit(alpha))
    throw std::invalid_argument("combine: p_meta, p_d and alpha must lie in [0, 1]");
  return alpha * p_meta + (1.0 - alpha) * p_d;
}

std::vector<double> log_ratios(std::span<const double> policy, std::span<const double> reference) {
  if (policy.size() != reference.size())
    throw std::invalid_argument("log-probability sequences differ in length");
  std::vector<double> out(policy.size());
  for (std::size_t t = 0; t < policy.size(); ++t) out[t] = policy[t] - reference[t];
  return out;
}

PenalizedReward kl_penalized(double r_d, std::span<const double> policy, std::span<const double> reference,
                             const KLController& controller) {
  PenalizedReward out;
  out.per_token_log_ratio = log_ratios(policy, reference);
  double sum = 0.0;
  for (double d : out.per_token_log_ratio) sum += d;
  out.kl_term = controller.beta * sum;
  out.final_reward = r_d - out.kl_term;
  return out;
}

KLController update_beta(KLController c, double observed_kl, double batch_contribution) {
  if (!c.adaptive) return c;
  const double error = std::clamp((observed_kl - c.target_kl) / c.target_kl, -0.2, 0.2);
  c.beta *= 1.0 + error * batch_contribution / c.horizon;
  return c;
}

RewardRecord make_reward_record(double p_meta, double p_d, double alpha, std::span<const double> policy,
                                std::span<const double> reference, const KLController& controller) {
  RewardRecord r;
  r.p_meta = p_meta;
  r.p_d = p_d;
  r.r_d = combine(p_meta, p_d, alpha);
  const auto penalized = kl_penalized(r.r_d, policy, reference, controller);
  r.kl_term = penalized.kl_term;
  r.final_reward = penalized.final_reward;
  return r;
}

std::vector<double> whiten(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  if (var <= 1e-24) return out;
  const double inv = 1.0 / std::sqrt(var + 1e-12);
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) * inv;
  return out;
}

std::vector<double> whiten_with_floor(std::span<const double> values, const std::vector<bool>& malformed) {
  if (malformed.size() != values.size()) throw std::invalid_argument("whiten_with_floor: size mismatch");
  std::vector<double> kept;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!malformed[i]) kept.push_back(values[i]);
  }
  const auto w = whiten(kept);
  std::vector<double> out(values.size(), 0.0);
  double floor = 0.0;
  if (!w.empty()) floor = *std::min_element(w.begin(), w.end());
  // Zero-variance parsed rewards whiten to 0; malformed samples then take -1 so they
  // still rank below every parsed one.
  const bool mixed = !kept.empty() && kept.size() < values.size();
  const bool flat = std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; });
  if (mixed && flat) floor = -1.0;
  for (std::size_t i = 0, k = 0; i < values.size(); ++i) out[i] = malformed[i] ? floor : w[k++];
  return out;
}

double token_f1(const std::vector<std::string>& gold, const std::vector<std::string>& predicted) {
  if (gold.size() != predicted.size()) throw std::invalid_argument("token_f1: length mismatch");
  std::size_t gold_n = 0, pred_n = 0, tp = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] != "O";
    const bool p = predicted[i] != "O";
    gold_n += g;
    pred_n += p;
    tp += g && p && gold[i] == predicted[i];
  }
  if (gold_n == 0 && pred_n == 0) return 1.0;
  if (tp == 0) return 0.0;
  const double precision = static_cast<double>(tp) / static_cast<double>(pred_n);
  const double recall = static_cast<double>(tp) / static_cast<double>(gold_n);
  return 2.0 * precision * recall / (precision + recall);
}

double per_datapoint_performance(const GeneratedDatapoint& d, LearnerBackend& learner) {
  if (!d.usable()) return 0.0;
  return std::clamp(learner.datapoint_performance(*d.parsed), 0.0, 1.0);
}

}  // namespace gcn
