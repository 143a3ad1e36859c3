#ifndef OMAC_MARC_HPP_
#define OMAC_MARC_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace omac::marc {

// One rollout of a query, scored on both branches. Log-probabilities are
// sequence-level scalars.
struct RolloutRecord {
  double reward_full = 0.0;
  double reward_comp = 0.0;
  double logprob_new = 0.0;
  double logprob_old = 0.0;
  double logprob_ref = 0.0;
};

struct RolloutGroup {
  std::vector<RolloutRecord> rollouts;
};

struct MarcConfig {
  double tau = 1e-4;
  double lambda_shape = 1.0;
  double epsilon_clip = 0.2;
  double beta_kl = 0.04;

  void Validate() const;
};

struct RolloutDiagnostics {
  double advantage;
  double degradation;
  double weight;
  double shaped_advantage;
  double ratio;
  double kl;
};

struct GroupLoss {
  double loss;
  std::vector<RolloutDiagnostics> rollouts;
};

// ReLU(full - comp) / (|full| + tau).
double Degradation(double reward_full, double reward_comp, double tau);

// (r - mean) / (population std + 1e-8).
std::vector<double> GrpoAdvantages(std::span<const double> rewards);

double DistillWeight(double advantage, double delta);

double ShapedAdvantage(double advantage, double weight, double lambda_shape);

// clip(exp(new - old), 1 - eps, 1 + eps).
double ClippedRatio(double logprob_new, double logprob_old,
                    double epsilon_clip);

// exp(ref - new) - (ref - new) - 1, never negative.
double KlEstimate(double logprob_new, double logprob_ref);

// (1/G) sum rho_i * shaped_i - beta * mean(kl_i). Advantages come from the
// compressed-branch rewards; the full-branch reward only feeds degradation.
GroupLoss CgrpoLoss(const RolloutGroup& group, const MarcConfig& config);

}  // namespace omac::marc

#endif  // OMAC_MARC_HPP_
