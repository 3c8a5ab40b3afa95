#include "signalrank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "signalrank/rng.hpp"
#include "signalrank/stats.hpp"

namespace signalrank {

namespace {

constexpr std::uint64_t kGroundTruthStream = 0x67740001;
constexpr std::uint64_t kImpressionStream = 0x696d0002;
constexpr std::uint64_t kTrueValueStream = 0x74760003;

constexpr double kClampTol = 1e-12;
constexpr double kBinOrBidRatio = 0.6;
constexpr double kPurchaseRatio = 0.3;

double clamp_probability(double q) {
    if (q < 0.0) {
        if (q < -kClampTol) throw std::invalid_argument("synth: effective probability below 0");
        return 0.0;
    }
    if (q > 1.0) {
        if (q > 1.0 + kClampTol) throw std::invalid_argument("synth: effective probability above 1");
        return 1.0;
    }
    return q;
}

void sample_features(Rng& rng, double u, const FeatureModel& fm, std::vector<double>& out) {
    out.resize(fm.weight.size());
    for (std::size_t j = 0; j < fm.weight.size(); ++j)
        out[j] = fm.weight[j] * u + fm.noise * (2.0 * rng.next_double() - 1.0);
}

}  // namespace

void SynthConfig::validate() const {
    if (n_impressions == 0) throw std::invalid_argument("SynthConfig: n_impressions must be > 0");
    if (catalog_size == 0 || catalog_size > QualificationMask::kMaxSignals)
        throw std::invalid_argument("SynthConfig: catalog_size out of range");
    if (qualification_masks.empty())
        throw std::invalid_argument("SynthConfig: no qualification masks");
    double total_weight = 0.0;
    for (const MaskSpec& ms : qualification_masks) {
        if (ms.mask.width() != catalog_size)
            throw std::invalid_argument("SynthConfig: mask width differs from catalog_size");
        if (!ms.mask.any()) throw std::invalid_argument("SynthConfig: empty qualification mask");
        if (ms.weight < 0.0) throw std::invalid_argument("SynthConfig: negative mask weight");
        total_weight += ms.weight;
    }
    if (total_weight <= 0.0) throw std::invalid_argument("SynthConfig: all mask weights are zero");
    if (base_rate < 0.0 || uplift_scale < 0.0 || popularity_noise < 0.0)
        throw std::invalid_argument("SynthConfig: negative rate parameter");
    if (base_rate - popularity_noise / 2.0 < -kClampTol)
        throw std::invalid_argument("SynthConfig: base_rate - popularity_noise/2 below 0");
    if (base_rate + uplift_scale + popularity_noise / 2.0 > 1.0 + kClampTol)
        throw std::invalid_argument("SynthConfig: base_rate + uplift + popularity_noise/2 above 1");
}

double GroundTruth::p(const QualificationMask& z, SignalId s) const {
    auto it = cells.find(z);
    if (it == cells.end()) throw std::invalid_argument("GroundTruth::p: unknown qualification cell");
    if (!z.test(s)) throw std::invalid_argument("GroundTruth::p: signal not qualified in cell");
    return it->second[s];
}

double GroundTruth::label_ratio(TargetLabel t) {
    switch (t) {
        case TargetLabel::kBbowac: return 1.0;
        case TargetLabel::kBinOrBid: return kBinOrBidRatio;
        case TargetLabel::kPurchase: return kPurchaseRatio;
    }
    return 1.0;
}

std::pair<Dataset, GroundTruth> generate(const SynthConfig& cfg) {
    cfg.validate();

    GroundTruth gt;
    gt.popularity_noise = cfg.popularity_noise;
    gt.target = cfg.target;
    gt.catalog.reserve(cfg.catalog_size);
    for (std::uint32_t s = 0; s < cfg.catalog_size; ++s) gt.catalog.push_back("s" + std::to_string(s));

    Rng gt_rng = derive_rng(cfg.seed, kGroundTruthStream);

    // True rates: within each cell the qualified signals take evenly spaced
    // uplifts over [0, uplift_scale], assigned by a seeded permutation so the
    // best signal differs across cells.
    double weight_total = 0.0;
    for (const MaskSpec& ms : cfg.qualification_masks) weight_total += ms.weight;
    for (const MaskSpec& ms : cfg.qualification_masks) {
        std::vector<SignalId> qualified = ms.mask.qualified();
        const std::size_t k = qualified.size();
        for (std::size_t i = k; i > 1; --i)
            std::swap(qualified[i - 1], qualified[gt_rng.next_below(i)]);

        std::vector<double> p(cfg.catalog_size, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < k; ++i) {
            double frac = (k > 1) ? static_cast<double>(i) / static_cast<double>(k - 1) : 0.0;
            p[qualified[i]] = cfg.base_rate + cfg.uplift_scale * frac;
        }
        gt.cells[ms.mask] = std::move(p);
        gt.mask_weights[ms.mask] += ms.weight / weight_total;  // merges duplicate masks
    }

    gt.feature_model.noise = 0.1;
    gt.feature_model.weight.resize(cfg.feature_dim);
    for (std::uint32_t j = 0; j < cfg.feature_dim; ++j)
        gt.feature_model.weight[j] = 0.5 + gt_rng.next_double();  // positive: engagement-like

    // Cumulative weights in canonical cell order for mask sampling.
    std::vector<QualificationMask> masks;
    std::vector<double> cum;
    {
        double acc = 0.0;
        for (const auto& [mask, w] : gt.mask_weights) {
            acc += w;
            masks.push_back(mask);
            cum.push_back(acc);
        }
        cum.back() = 1.0;
    }
    std::vector<std::vector<SignalId>> qualified_by_cell;
    qualified_by_cell.reserve(masks.size());
    for (const auto& m : masks) qualified_by_cell.push_back(m.qualified());

    Dataset d;
    d.catalog = gt.catalog;
    d.feature_dim = cfg.feature_dim;
    d.target = cfg.target;
    d.impressions.resize(cfg.n_impressions);

    // One counter-based stream per impression: blocks of any size can be
    // generated independently and still reproduce the same log.
    for (std::uint64_t i = 0; i < cfg.n_impressions; ++i) {
        Rng rng = derive_rng(cfg.seed, kImpressionStream, i);
        Impression& imp = d.impressions[i];
        imp.impression_id = i;

        const double x = rng.next_double();
        std::size_t cell = std::size_t(std::lower_bound(cum.begin(), cum.end(), x,
                                                        [](double c, double v) { return c <= v; }) -
                                       cum.begin());
        if (cell >= masks.size()) cell = masks.size() - 1;
        imp.qual = masks[cell];

        const auto& qualified = qualified_by_cell[cell];
        imp.shown = qualified[rng.next_below(qualified.size())];

        const double u = rng.next_double();
        sample_features(rng, u, gt.feature_model, imp.features);

        const double q = clamp_probability(gt.cells[imp.qual][imp.shown] +
                                           cfg.popularity_noise * (u - 0.5));
        const double v = rng.next_double();
        imp.conversion.bbowac = v < q;
        imp.conversion.bin_or_bid = v < q * kBinOrBidRatio;
        imp.conversion.purchase = v < q * kPurchaseRatio;
    }

    return {std::move(d), std::move(gt)};
}

OraclePolicy::OraclePolicy(const GroundTruth& gt) {
    for (const auto& [mask, p] : gt.cells) {
        SignalId best = mask.first_set();
        for (SignalId s : mask.qualified())
            if (p[s] > p[best]) best = s;
        best_[mask] = best;
    }
}

SignalId OraclePolicy::assign(std::span<const double>, const QualificationMask& qual) const {
    auto it = best_.find(qual);
    if (it != best_.end()) return it->second;
    return qual.first_set();
}

OraclePolicy oracle_policy(const GroundTruth& gt) { return OraclePolicy(gt); }

TrueValue true_value(const RankingPolicy& policy, const GroundTruth& gt,
                     const std::map<QualificationMask, double>& mask_weights,
                     std::uint64_t mc_samples, std::uint64_t seed) {
    double weight_total = 0.0;
    for (const auto& [mask, w] : mask_weights) weight_total += w;
    if (weight_total <= 0.0) throw std::invalid_argument("true_value: mask weights sum to zero");
    const double ratio = gt.target_ratio();

    if (!policy.feature_dependent()) {
        // Popularity effect is zero-mean and independent of a mask-only
        // assignment, so the cell sum is exact.
        KahanSum acc;
        std::vector<double> zeros(gt.feature_model.weight.size(), 0.0);
        for (const auto& [mask, w] : mask_weights) {
            SignalId s = policy.assign(zeros, mask);
            if (!mask.test(s))
                throw std::invalid_argument("true_value: policy assigned a non-qualified signal");
            acc.add((w / weight_total) * ratio * gt.p(mask, s));
        }
        return {acc.value(), 0.0};
    }

    // Monte-Carlo over simulated impressions for feature-dependent policies.
    std::vector<QualificationMask> masks;
    std::vector<double> cum;
    double acc_w = 0.0;
    for (const auto& [mask, w] : mask_weights) {
        acc_w += w / weight_total;
        masks.push_back(mask);
        cum.push_back(acc_w);
    }
    cum.back() = 1.0;

    KahanSum sum, sum_sq;
    std::vector<double> features;
    for (std::uint64_t t = 0; t < mc_samples; ++t) {
        Rng rng = derive_rng(seed, kTrueValueStream, t);
        const double x = rng.next_double();
        std::size_t cell = std::size_t(std::lower_bound(cum.begin(), cum.end(), x,
                                                        [](double c, double v) { return c <= v; }) -
                                       cum.begin());
        if (cell >= masks.size()) cell = masks.size() - 1;
        const QualificationMask& z = masks[cell];

        const double u = rng.next_double();
        sample_features(rng, u, gt.feature_model, features);
        SignalId s = policy.assign(features, z);
        if (!z.test(s))
            throw std::invalid_argument("true_value: policy assigned a non-qualified signal");
        const double val = ratio * (gt.p(z, s) + gt.popularity_noise * (u - 0.5));
        sum.add(val);
        sum_sq.add(val * val);
    }
    const double n = static_cast<double>(mc_samples);
    const double mean = sum.value() / n;
    const double var = std::max(0.0, sum_sq.value() / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

double true_value_uniform(const GroundTruth& gt,
                          const std::map<QualificationMask, double>& mask_weights) {
    double weight_total = 0.0;
    for (const auto& [mask, w] : mask_weights) weight_total += w;
    if (weight_total <= 0.0) throw std::invalid_argument("true_value_uniform: zero mask weights");

    KahanSum acc;
    for (const auto& [mask, w] : mask_weights) {
        KahanSum cell;
        for (SignalId s : mask.qualified()) cell.add(gt.p(mask, s));
        acc.add((w / weight_total) * gt.target_ratio() * cell.value() /
                static_cast<double>(mask.count()));
    }
    return acc.value();
}

}  // namespace signalrank
