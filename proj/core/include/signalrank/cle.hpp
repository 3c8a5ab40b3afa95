// Conversion Likelihood Estimator: empirical per-cell conversion rates,
// ranked within each qualification cell when the rate differences pass a
// two-proportion significance gate.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "signalrank/types.hpp"

namespace signalrank {

struct TwoProportionResult {
    double z = 0.0;
    double p_value = 1.0;
};

// Pooled two-proportion z-test, two-sided. Degenerate pooled rate (0 or 1)
// carries no variance and reports z=0, p=1.
TwoProportionResult two_proportion_z(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2,
                                     std::uint64_t n2);

struct SignalCellStats {
    SignalId signal = 0;
    std::uint64_t impressions = 0;  // n_s
    std::uint64_t conversions = 0;  // k_s
    double rate = 0.0;              // k_s / n_s (0 when n_s = 0)
};

// Adjacent-pair test in rate-descending walk order, Bonferroni-corrected by
// the number of adjacent pairs in the cell.
struct AdjacentPairTest {
    SignalId higher = 0;
    SignalId lower = 0;
    double z = 0.0;
    double p_raw = 1.0;
    double p_corrected = 1.0;
    bool significant = false;
};

struct CellRanking {
    QualificationMask mask;
    std::vector<SignalCellStats> stats;       // ascending signal id
    std::vector<SignalId> ranking;            // permutation of the qualified signals
    std::vector<AdjacentPairTest> pair_tests; // empty for fallback cells
    bool insufficient_data = false;           // some n_s under min_cell_n: default order used
};

struct CleConfig {
    double alpha = 0.05;
    std::uint64_t min_cell_n = 1000;
    std::vector<SignalId> default_order;  // permutation of the catalog; production order
};

class CleModel : public RankingPolicy {
public:
    std::vector<std::string> catalog;
    CleConfig config;
    std::map<QualificationMask, CellRanking> cells;

    struct Assignment {
        SignalId signal = 0;
        bool unseen_mask = false;  // mask absent from training; default-order fallback
    };

    Assignment assign_detailed(const QualificationMask& qual) const;
    SignalId assign(std::span<const double> features, const QualificationMask& qual) const override;
    bool feature_dependent() const override { return false; }
};

// Per qualification cell: compute rates, sort descending, merge adjacent
// pairs whose corrected p-value exceeds alpha into default-ordered tie
// groups. Cells with any qualified signal under min_cell_n impressions fall
// back entirely to the default order.
CleModel fit_cle(const Dataset& d, const CleConfig& config);

}  // namespace signalrank
