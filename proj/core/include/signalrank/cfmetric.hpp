// Offline counterfactual conversion-rate estimation on conditionally
// randomized logs: the simple do-estimator for a single qualification cell,
// the adjustment over the qualification indicator for the general case, and
// a bootstrap standard error.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "signalrank/types.hpp"

namespace signalrank {

// Sufficient statistics of (dataset, policy) for every estimator here:
// counts over strata (qualification cell, shown signal, assigned signal,
// outcome). Impressions within a stratum are exchangeable, so resampling
// impressions reduces to resampling these counts.
class PartitionIndex {
public:
    std::uint32_t catalog_size = 0;
    std::size_t n = 0;
    std::uint64_t conversions = 0;             // sum of Y over the log
    std::vector<QualificationMask> cells;      // canonical (width, bits) order
    std::vector<std::uint64_t> counts;         // cells * k * k * 2, cell-major

    std::size_t idx(std::size_t cell, SignalId shown, SignalId assigned, bool y) const {
        return ((cell * catalog_size + shown) * catalog_size + assigned) * 2 + (y ? 1 : 0);
    }

    std::uint64_t actual_count(SignalId shown) const;          // N_i
    std::uint64_t model_count(SignalId assigned) const;        // |V_i^M|
    std::uint64_t joint_count(SignalId shown, SignalId assigned) const;  // |V_i ∩ V_j^M|
};

// Incremental builder; usable for streaming ingestion (bounded memory: the
// table only). Throws when an assignment is not qualified, naming the
// impression.
class PartitionIndexBuilder {
public:
    explicit PartitionIndexBuilder(std::uint32_t catalog_size) : catalog_size_(catalog_size) {}

    void add(std::uint64_t impression_id, const QualificationMask& qual, SignalId shown,
             SignalId assigned, bool y);
    void merge(const PartitionIndexBuilder& other);
    PartitionIndex finish() const;

private:
    std::uint32_t catalog_size_;
    std::size_t n_ = 0;
    std::uint64_t conversions_ = 0;
    std::map<QualificationMask, std::vector<std::uint64_t>> cells_;
};

// Applies the policy to every impression. threads > 1 splits the log into
// fixed blocks whose integer tallies merge in block order, so the result is
// identical to the serial pass.
PartitionIndex build_partition_index(const Dataset& d, const RankingPolicy& policy,
                                     unsigned threads = 1);
// Partition of the logged assignment itself (model group = actual group).
PartitionIndex build_partition_index_logged(const Dataset& d);

struct GroupReport {
    SignalId signal = 0;
    double weight = 0.0;    // |V_i^M| / N
    double estimate = 0.0;  // P(Y=1 | do(T=s_i), V_i^M)
    bool estimable = true;
    std::uint64_t model_count = 0;
    std::uint64_t matched_count = 0;  // units with T = s_i inside the group
    std::uint32_t fallback_cells = 0; // inner terms served by the dataset-wide rate
    double dropped_mass = 0.0;        // this group's contribution to skipped_mass
};

struct CounterfactualReport {
    double c_hat = 0.0;
    double logged_rate = 0.0;
    double uplift_estimate = 0.0;  // c_hat - logged_rate
    std::vector<GroupReport> per_group;
    double skipped_mass = 0.0;  // probability mass of cells that could not be estimated
    double stderr_ = 0.0;       // bootstrap standard error (0 if not run)
    std::uint32_t bootstrap_replicates = 0;
    std::uint64_t seed = 0;
};

struct EstimatorOptions {
    std::uint32_t bootstrap_replicates = 200;  // < 2 disables the bootstrap
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

// Eq.-1 style estimator; requires a single qualification cell and errors
// otherwise, directing the caller to estimate_adjusted.
CounterfactualReport estimate_simple(const Dataset& d, const RankingPolicy& policy,
                                     const EstimatorOptions& opts = {});

// Adjustment over the qualification indicator. Inestimable inner terms fall
// back to the dataset-wide per-cell rate; cells missing even that are
// dropped with their mass reported in skipped_mass.
CounterfactualReport estimate_adjusted(const Dataset& d, const RankingPolicy& policy,
                                       const EstimatorOptions& opts = {});

// Same estimator on a prebuilt index (streaming path).
CounterfactualReport estimate_from_index(const PartitionIndex& index,
                                         const EstimatorOptions& opts = {});

// Standard deviation of c_hat over `replicates` resamples of the impressions
// with replacement. Deterministic per seed.
double bootstrap_stderr(const Dataset& d, const RankingPolicy& policy, std::uint32_t replicates,
                        std::uint64_t seed);

struct NamedPolicy {
    std::string name;
    const RankingPolicy* policy = nullptr;
};

// Evaluates every policy on the same dataset with estimate_adjusted; the
// logged assignment and a uniform-random baseline are always included.
std::vector<std::pair<std::string, CounterfactualReport>> compare_policies(
    const Dataset& d, const std::vector<NamedPolicy>& policies, const EstimatorOptions& opts = {});

}  // namespace signalrank
