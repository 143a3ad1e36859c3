#include "omac/marc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "omac/error.hpp"

namespace omac::marc {

void MarcConfig::Validate() const {
  if (!(tau > 0.0)) Fail(ErrorCode::kInvalidInput, "tau must be positive");
  if (!(lambda_shape >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "lambda must be non-negative");
  }
  if (!(epsilon_clip > 0.0 && epsilon_clip < 1.0)) {
    Fail(ErrorCode::kInvalidInput, "epsilon must lie in (0, 1)");
  }
  if (!(beta_kl >= 0.0)) {
    Fail(ErrorCode::kInvalidInput, "beta must be non-negative");
  }
}

double Degradation(double reward_full, double reward_comp, double tau) {
  return std::max(0.0, reward_full - reward_comp) / (std::abs(reward_full) + tau);
}

std::vector<double> GrpoAdvantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    Fail(ErrorCode::kInvalidInput, "advantages need a group of at least 2");
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / n);
  std::vector<double> advantages;
  advantages.reserve(rewards.size());
  for (double r : rewards) advantages.push_back((r - mean) / (std_dev + 1e-8));
  return advantages;
}

double DistillWeight(double advantage, double delta) {
  return std::max(0.0, advantage) * delta;
}

double ShapedAdvantage(double advantage, double weight, double lambda_shape) {
  return advantage + lambda_shape * weight;
}

double ClippedRatio(double logprob_new, double logprob_old,
                    double epsilon_clip) {
  return std::clamp(std::exp(logprob_new - logprob_old), 1.0 - epsilon_clip,
                    1.0 + epsilon_clip);
}

double KlEstimate(double logprob_new, double logprob_ref) {
  const double log_ratio = logprob_ref - logprob_new;
  return std::max(0.0, std::expm1(log_ratio) - log_ratio);
}

GroupLoss CgrpoLoss(const RolloutGroup& group, const MarcConfig& config) {
  config.Validate();
  const auto& rollouts = group.rollouts;
  if (rollouts.size() < 2) {
    Fail(ErrorCode::kInvalidInput,
         "a rollout group needs G >= 2, got " +
             std::to_string(rollouts.size()));
  }
  std::vector<double> rewards;
  rewards.reserve(rollouts.size());
  for (const auto& r : rollouts) rewards.push_back(r.reward_comp);
  const auto advantages = GrpoAdvantages(rewards);

  GroupLoss out;
  double surrogate = 0.0, kl = 0.0;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const auto& r = rollouts[i];
    RolloutDiagnostics d;
    d.advantage = advantages[i];
    d.degradation = Degradation(r.reward_full, r.reward_comp, config.tau);
    d.weight = DistillWeight(d.advantage, d.degradation);
    d.shaped_advantage =
        ShapedAdvantage(d.advantage, d.weight, config.lambda_shape);
    d.ratio = ClippedRatio(r.logprob_new, r.logprob_old, config.epsilon_clip);
    d.kl = KlEstimate(r.logprob_new, r.logprob_ref);
    surrogate += d.ratio * d.shaped_advantage;
    kl += d.kl;
    out.rollouts.push_back(d);
  }
  const double g = static_cast<double>(rollouts.size());
  out.loss = surrogate / g - config.beta_kl * kl / g;
  return out;
}

}  // namespace omac::marc
