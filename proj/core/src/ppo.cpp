#include "gcn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gcn {

std::vector<double> token_rewards(const PolicySample& s, double beta) {
  if (s.old_logprobs.size() != s.continuation.size() || s.reference_logprobs.size() != s.continuation.size())
    throw std::invalid_argument("policy sample logprob lengths do not match continuation");
  std::vector<double> r(s.continuation.size());
  for (std::size_t t = 0; t < r.size(); ++t) r[t] = -beta * (s.old_logprobs[t] - s.reference_logprobs[t]);
  if (!r.empty()) r.back() += s.terminal_reward;
  return r;
}

std::vector<double> returns_to_go(const std::vector<double>& rewards) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc += rewards[t];
    g[t] = acc;
  }
  return g;
}

PpoStats ppo_update(LanguageModelBackend& policy, const std::vector<PolicySample>& samples, const PpoConfig& config,
                    double beta, Rng& rng) {
  if (config.epochs < 0 || config.minibatch_size <= 0 || config.clip_ratio <= 0.0)
    throw std::invalid_argument("invalid PPO configuration");
  if (config.value_baseline && !policy.has_value_head())
    throw std::invalid_argument("value baseline requested but the backend has no value head");
  PpoStats stats;
  if (samples.empty()) return stats;

  std::vector<std::vector<double>> returns(samples.size());
  std::vector<std::vector<double>> advantages(samples.size());
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    returns[i] = returns_to_go(token_rewards(s, beta));
    advantages[i] = returns[i];
    for (std::size_t t = 0; t < s.continuation.size(); ++t) kl_sum += s.old_logprobs[t] - s.reference_logprobs[t];
    if (config.value_baseline && !s.continuation.empty()) {
      const auto old = policy.score(s.prompt, s.continuation);
      for (std::size_t t = 0; t < advantages[i].size(); ++t) advantages[i][t] -= old.values[t];
    }
  }
  stats.mean_kl = kl_sum / static_cast<double>(samples.size());

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const double lo = 1.0 - config.clip_ratio, hi = 1.0 + config.clip_ratio;
  long long clipped = 0, counted = 0;
  double loss_sum = 0.0;
  long long loss_tokens = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.minibatch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.minibatch_size));
      std::size_t n_tok = 0;
      for (std::size_t k = start; k < stop; ++k) n_tok += samples[order[k]].continuation.size();
      if (n_tok == 0) continue;
      const double scale = 1.0 / static_cast<double>(n_tok);
      policy.zero_grad();
      double mb_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto& s = samples[order[k]];
        if (s.continuation.empty()) continue;
        const auto& adv = advantages[order[k]];
        const auto cur = policy.score(s.prompt, s.continuation);
        std::vector<double> dlogp(s.continuation.size(), 0.0);
        std::vector<double> dvalue;
        if (config.value_baseline) dvalue.assign(s.continuation.size(), 0.0);
        for (std::size_t t = 0; t < s.continuation.size(); ++t) {
          const double ratio = std::exp(cur.logprobs[t] - s.old_logprobs[t]);
          const double a = adv[t];
          const double unclipped = ratio * a;
          const double clipped_obj = std::clamp(ratio, lo, hi) * a;
          mb_loss -= std::min(unclipped, clipped_obj);
          const bool is_clipped = (a > 0.0 && ratio > hi) || (a < 0.0 && ratio < lo);
          ++counted;
          if (is_clipped) {
            ++clipped;
          } else {
            // d(-ratio * a)/d logp = -ratio * a
            dlogp[t] = -ratio * a * scale;
          }
          if (config.value_baseline) {
            const double diff = cur.values[t] - returns[order[k]][t];
            mb_loss += 0.5 * config.value_coef * diff * diff;
            dvalue[t] = config.value_coef * diff * scale;
          }
        }
        policy.accumulate_gradient(s.prompt, s.continuation, dlogp, dvalue);
      }
      if (!std::isfinite(mb_loss)) {
        policy.zero_grad();
        stats.aborted = true;
        stats.clip_fraction = counted ? static_cast<double>(clipped) / static_cast<double>(counted) : 0.0;
        return stats;
      }
      loss_sum += mb_loss;
      loss_tokens += static_cast<long long>(n_tok);
      policy.apply_sgd(config.learning_rate);
      ++stats.updates;
    }
  }
  stats.clip_fraction = counted ? static_cast<double>(clipped) / static_cast<double>(counted) : 0.0;
  stats.policy_loss = loss_tokens ? loss_sum / static_cast<double>(loss_tokens) : 0.0;
  return stats;
}

}  // namespace gcn
