#include "signalrank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "signalrank/rng.hpp"

namespace signalrank {

const char* to_string(TargetLabel t) {
    switch (t) {
        case TargetLabel::kBbowac: return "bbowac";
        case TargetLabel::kBinOrBid: return "bin_or_bid";
        case TargetLabel::kPurchase: return "purchase";
    }
    return "bbowac";
}

TargetLabel target_from_string(const std::string& s) {
    if (s == "bbowac") return TargetLabel::kBbowac;
    if (s == "bin_or_bid") return TargetLabel::kBinOrBid;
    if (s == "purchase") return TargetLabel::kPurchase;
    throw std::invalid_argument("unknown target label: " + s);
}

std::vector<Violation> validate_dataset(const Dataset& d) {
    std::vector<Violation> out;
    const std::uint32_t width = d.catalog_size();
    std::unordered_set<std::uint64_t> seen_ids;
    seen_ids.reserve(d.impressions.size());

    for (const Impression& imp : d.impressions) {
        if (!seen_ids.insert(imp.impression_id).second)
            out.push_back({imp.impression_id, "duplicate-id", "impression_id repeats"});

        if (imp.qual.width() != width) {
            out.push_back({imp.impression_id, "mask-width-mismatch",
                           "mask width " + std::to_string(imp.qual.width()) + " vs catalog " +
                               std::to_string(width)});
        } else {
            if (!imp.qual.any())
                out.push_back({imp.impression_id, "empty-qualification", "no qualified signal"});
            if (imp.shown >= width)
                out.push_back({imp.impression_id, "shown-out-of-range",
                               "shown id " + std::to_string(imp.shown)});
            else if (!imp.qual.test(imp.shown))
                out.push_back({imp.impression_id, "shown-not-qualified",
                               "shown signal's qualification bit is unset"});
        }

        if (imp.features.size() != d.feature_dim) {
            out.push_back({imp.impression_id, "feature-dim-mismatch",
                           std::to_string(imp.features.size()) + " vs declared " +
                               std::to_string(d.feature_dim)});
        } else {
            for (double v : imp.features) {
                if (!std::isfinite(v)) {
                    out.push_back({imp.impression_id, "nonfinite-feature", ""});
                    break;
                }
            }
        }

        if (!imp.conversion.monotone())
            out.push_back({imp.impression_id, "label-monotonicity",
                           "purchase => bin_or_bid => bbowac violated"});
    }
    return out;
}

std::map<QualificationMask, std::vector<std::size_t>> partition_by_qualification(const Dataset& d) {
    std::map<QualificationMask, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < d.impressions.size(); ++i)
        buckets[d.impressions[i].qual].push_back(i);
    return buckets;
}

std::pair<Dataset, Dataset> split_train_eval(const Dataset& d, double eval_fraction,
                                             std::uint64_t seed, bool strict) {
    if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
        throw std::invalid_argument("split_train_eval: eval_fraction must be in (0,1)");

    auto buckets = partition_by_qualification(d);
    std::vector<char> is_eval(d.impressions.size(), 0);

    for (const auto& [mask, indices] : buckets) {
        if (strict && indices.size() < 2)
            throw std::invalid_argument(
                "split_train_eval: qualification bucket with fewer than 2 impressions "
                "(mask bits " + std::to_string(mask.bits()) + ")");

        const std::size_t n = indices.size();
        const std::size_t n_eval = static_cast<std::size_t>(
            std::llround(eval_fraction * static_cast<double>(n)));

        // Fisher-Yates over a scratch copy; stream keyed by the mask so the
        // draw for one bucket does not depend on which other masks exist.
        std::vector<std::size_t> shuffled = indices;
        Rng rng = derive_rng(seed, mask.bits(), mask.width());
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(rng.next_below(i));
            std::swap(shuffled[i - 1], shuffled[j]);
        }
        for (std::size_t i = 0; i < n_eval && i < n; ++i) is_eval[shuffled[i]] = 1;
    }

    Dataset train, eval;
    train.catalog = eval.catalog = d.catalog;
    train.feature_dim = eval.feature_dim = d.feature_dim;
    train.target = eval.target = d.target;
    for (std::size_t i = 0; i < d.impressions.size(); ++i)
        (is_eval[i] ? eval : train).impressions.push_back(d.impressions[i]);
    return {std::move(train), std::move(eval)};
}

}  // namespace signalrank
