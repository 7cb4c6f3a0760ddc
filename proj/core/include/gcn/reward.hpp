#pragma once

#include <span>
#include <vector>

#include "gcn/datamodel.hpp"

namespace gcn {

class LearnerBackend;

// R_d = alpha * p_meta + (1 - alpha) * p_d. Throws std::invalid_argument outside [0, 1].
double combine(double p_meta, double p_d, double alpha);

struct KLController {
  double beta = 0.2;
  double target_kl = 6.0;  // nats per datapoint
  double horizon = 10000.0;
  bool adaptive = true;

  bool operator==(const KLController&) const = default;
};

// Per-token log(pi/rho); throws std::invalid_argument on length mismatch.
std::vector<double> log_ratios(std::span<const double> logprobs_policy, std::span<const double> logprobs_reference);

struct PenalizedReward {
  double kl_term = 0.0;       // beta * sum_t (log pi_t - log rho_t)
  double final_reward = 0.0;  // r_d - kl_term
  std::vector<double> per_token_log_ratio;
};

PenalizedReward kl_penalized(double r_d, std::span<const double> logprobs_policy,
                             std::span<const double> logprobs_reference, const KLController& controller);

// Proportional controller: e = clip((kl - target) / target, -0.2, 0.2),
// beta <- beta * (1 + e * batch_contribution / horizon). No-op when not adaptive.
KLController update_beta(KLController controller, double observed_kl, double batch_contribution);

// Builds the full record for one datapoint.
RewardRecord make_reward_record(double p_meta, double p_d, double alpha, std::span<const double> logprobs_policy,
                                std::span<const double> logprobs_reference, const KLController& controller);

// Mean/std whitening; a zero-variance batch maps to all zeros.
std::vector<double> whiten(std::span<const double> values);

// Whitens the task rewards of a generator batch. Datapoints flagged `malformed` are
// excluded from the statistics and receive the batch minimum of the whitened values.
std::vector<double> whiten_with_floor(std::span<const double> values, const std::vector<bool>& malformed);

// Performance of the trained learner on one generated datapoint: 1/0 intent accuracy,
// token-level F1 for slots, exp(-per-token loss) for dialogue. Unusable datapoints score 0.
double per_datapoint_performance(const GeneratedDatapoint& datapoint, LearnerBackend& learner);

// Token-level F1 over non-O tags; 1 when neither sequence has a non-O tag.
double token_f1(const std::vector<std::string>& gold, const std::vector<std::string>& predicted);

}  // namespace gcn
