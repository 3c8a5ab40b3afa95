// Conditional-randomization simulator with known ground truth, plus the
// oracle policy and closed-form/Monte-Carlo true policy values used to
// verify the estimators.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "signalrank/types.hpp"

namespace signalrank {

struct MaskSpec {
    QualificationMask mask;
    double weight = 1.0;  // sampling weight across qualification cells
};

struct SynthConfig {
    std::uint64_t n_impressions = 0;
    std::uint32_t catalog_size = 0;
    std::vector<MaskSpec> qualification_masks;
    double base_rate = 0.02;
    double uplift_scale = 0.01;   // per-cell spread of true conversion rates
    std::uint32_t feature_dim = 3;
    double popularity_noise = 0.01;  // amplitude of the zero-mean popularity effect on Y
    std::uint64_t seed = 0;
    TargetLabel target = TargetLabel::kBbowac;

    void validate() const;  // throws std::invalid_argument on a bad config
};

// Deterministic link from the latent popularity score to feature values:
// feature j = weight[j] * u + noise * uniform(-1, 1).
struct FeatureModel {
    std::vector<double> weight;
    double noise = 0.1;
};

// Everything needed to recompute any impression's true conversion
// probability: per-cell per-signal rates, cell sampling weights, and the
// feature/popularity parameters.
struct GroundTruth {
    std::vector<std::string> catalog;
    // Per cell: probability vector indexed by SignalId. Entries for
    // non-qualified signals are NaN.
    std::map<QualificationMask, std::vector<double>> cells;
    std::map<QualificationMask, double> mask_weights;  // normalized
    FeatureModel feature_model;
    double popularity_noise = 0.0;
    TargetLabel target = TargetLabel::kBbowac;

    double p(const QualificationMask& z, SignalId s) const;

    // Fixed conditional chain used when sampling the three labels:
    // P(bin_or_bid) = 0.6 * P(bbowac), P(purchase) = 0.3 * P(bbowac).
    static double label_ratio(TargetLabel t);
    double target_ratio() const { return label_ratio(target); }
};

// Samples an impression log under conditional randomization: qualification
// cell by weight, shown signal uniform among qualified, conversion from
// p(z, shown) plus the popularity effect. Byte-identical output for a fixed
// config.
std::pair<Dataset, GroundTruth> generate(const SynthConfig& cfg);

// Per-cell argmax of the true rates; ties break to the lowest SignalId.
class OraclePolicy : public RankingPolicy {
public:
    explicit OraclePolicy(const GroundTruth& gt);
    SignalId assign(std::span<const double> features, const QualificationMask& qual) const override;
    bool feature_dependent() const override { return false; }

private:
    std::map<QualificationMask, SignalId> best_;
};

OraclePolicy oracle_policy(const GroundTruth& gt);

struct TrueValue {
    double value = 0.0;
    double stderr_ = 0.0;  // 0 when computed exactly
};

// Expected conversion rate of a policy under the ground truth. Exact cell
// sum for mask-only policies; Monte-Carlo over simulated impressions (with
// reported standard error) when the policy reads features.
TrueValue true_value(const RankingPolicy& policy, const GroundTruth& gt,
                     const std::map<QualificationMask, double>& mask_weights,
                     std::uint64_t mc_samples = 200000, std::uint64_t seed = 1);

// Closed-form value of assigning uniformly at random within each cell.
double true_value_uniform(const GroundTruth& gt,
                          const std::map<QualificationMask, double>& mask_weights);

}  // namespace signalrank
