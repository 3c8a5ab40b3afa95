#include "signalrank/cle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "signalrank/stats.hpp"

namespace signalrank {

TwoProportionResult two_proportion_z(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2,
                                     std::uint64_t n2) {
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("two_proportion_z: zero sample size");
    if (k1 > n1 || k2 > n2) throw std::invalid_argument("two_proportion_z: successes exceed trials");

    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    if (pooled <= 0.0 || pooled >= 1.0) return {0.0, 1.0};

    const double se = std::sqrt(pooled * (1.0 - pooled) *
                                (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    const double z = (p1 - p2) / se;
    return {z, two_sided_p(z)};
}

namespace {

std::vector<std::uint32_t> default_order_positions(const CleConfig& config,
                                                   std::uint32_t catalog_size) {
    if (config.default_order.size() != catalog_size)
        throw std::invalid_argument("fit_cle: default_order must be a permutation of the catalog");
    std::vector<std::uint32_t> pos(catalog_size, catalog_size);
    for (std::uint32_t i = 0; i < catalog_size; ++i) {
        SignalId s = config.default_order[i];
        if (s >= catalog_size || pos[s] != catalog_size)
            throw std::invalid_argument("fit_cle: default_order must be a permutation of the catalog");
        pos[s] = i;
    }
    return pos;
}

std::vector<SignalId> default_order_filtered(const CleConfig& config,
                                             const QualificationMask& mask) {
    std::vector<SignalId> out;
    for (SignalId s : config.default_order)
        if (mask.test(s)) out.push_back(s);
    return out;
}

}  // namespace

CleModel fit_cle(const Dataset& d, const CleConfig& config) {
    const std::uint32_t width = d.catalog_size();
    const std::vector<std::uint32_t> order_pos = default_order_positions(config, width);
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw std::invalid_argument("fit_cle: alpha must be in (0,1)");

    CleModel model;
    model.catalog = d.catalog;
    model.config = config;

    // Single pass: per-cell per-signal (impressions, conversions).
    struct Counts {
        std::vector<std::uint64_t> n, k;
    };
    std::map<QualificationMask, Counts> counts;
    for (const Impression& imp : d.impressions) {
        Counts& c = counts[imp.qual];
        if (c.n.empty()) {
            c.n.assign(width, 0);
            c.k.assign(width, 0);
        }
        c.n[imp.shown] += 1;
        c.k[imp.shown] += d.y(imp);
    }

    for (const auto& [mask, c] : counts) {
        CellRanking cell;
        cell.mask = mask;

        const std::vector<SignalId> qualified = mask.qualified();
        bool insufficient = false;
        for (SignalId s : qualified) {
            SignalCellStats st;
            st.signal = s;
            st.impressions = c.n[s];
            st.conversions = c.k[s];
            st.rate = st.impressions > 0
                          ? static_cast<double>(st.conversions) / static_cast<double>(st.impressions)
                          : 0.0;
            // An unobserved signal cannot be ranked regardless of min_cell_n.
            if (st.impressions < std::max<std::uint64_t>(config.min_cell_n, 1)) insufficient = true;
            cell.stats.push_back(st);
        }

        if (insufficient) {
            cell.insufficient_data = true;
            cell.ranking = default_order_filtered(config, mask);
            model.cells[mask] = std::move(cell);
            continue;
        }

        // Rate-descending walk order; equal rates fall back to default order
        // so the sort is deterministic.
        std::vector<const SignalCellStats*> sorted;
        for (const SignalCellStats& st : cell.stats) sorted.push_back(&st);
        std::sort(sorted.begin(), sorted.end(),
                  [&](const SignalCellStats* a, const SignalCellStats* b) {
                      if (a->rate != b->rate) return a->rate > b->rate;
                      return order_pos[a->signal] < order_pos[b->signal];
                  });

        const std::size_t n_pairs = sorted.size() > 1 ? sorted.size() - 1 : 0;
        std::vector<bool> tied_with_next(sorted.size(), false);
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
            auto res = two_proportion_z(sorted[i]->conversions, sorted[i]->impressions,
                                        sorted[i + 1]->conversions, sorted[i + 1]->impressions);
            AdjacentPairTest pt;
            pt.higher = sorted[i]->signal;
            pt.lower = sorted[i + 1]->signal;
            pt.z = res.z;
            pt.p_raw = res.p_value;
            pt.p_corrected = std::min(1.0, res.p_value * static_cast<double>(n_pairs));
            pt.significant = pt.p_corrected <= config.alpha;
            tied_with_next[i] = !pt.significant;
            cell.pair_tests.push_back(pt);
        }

        // Maximal runs of non-significant adjacent pairs form tie groups,
        // each reordered by the default order.
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && tied_with_next[j]) ++j;
            std::vector<SignalId> group;
            for (std::size_t t = i; t <= j; ++t) group.push_back(sorted[t]->signal);
            std::sort(group.begin(), group.end(),
                      [&](SignalId a, SignalId b) { return order_pos[a] < order_pos[b]; });
            cell.ranking.insert(cell.ranking.end(), group.begin(), group.end());
            i = j + 1;
        }

        model.cells[mask] = std::move(cell);
    }

    return model;
}

CleModel::Assignment CleModel::assign_detailed(const QualificationMask& qual) const {
    if (!qual.any()) throw std::invalid_argument("CleModel::assign: empty qualification mask");
    auto it = cells.find(qual);
    if (it != cells.end()) return {it->second.ranking.front(), false};
    for (SignalId s : config.default_order)
        if (qual.test(s)) return {s, true};
    // Mask qualifies a signal outside the trained catalog width.
    return {qual.first_set(), true};
}

SignalId CleModel::assign(std::span<const double>, const QualificationMask& qual) const {
    return assign_detailed(qual).signal;
}

}  // namespace signalrank
