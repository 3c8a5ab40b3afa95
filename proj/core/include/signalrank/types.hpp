// Domain types shared by every model and estimator in this library.
#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace signalrank {

// Dense index into a placement's signal catalog.
using SignalId = std::uint32_t;

// One bit per catalog signal; bit k set means signal k may be shown for the
// impression. Width is pinned to the catalog size so masks from different
// catalogs never compare equal by accident.
class QualificationMask {
public:
    static constexpr std::uint32_t kMaxSignals = 64;

    QualificationMask() = default;
    QualificationMask(std::uint64_t bits, std::uint32_t width) : bits_(bits), width_(width) {
        if (width > kMaxSignals)
            throw std::invalid_argument("QualificationMask: catalog size exceeds " +
                                        std::to_string(kMaxSignals) + " signals");
        if (width < kMaxSignals && (bits >> width) != 0)
            throw std::invalid_argument("QualificationMask: bit set beyond catalog size");
    }

    std::uint64_t bits() const { return bits_; }
    std::uint32_t width() const { return width_; }
    bool test(SignalId s) const { return s < width_ && (bits_ >> s) & 1u; }
    void set(SignalId s) {
        if (s >= width_) throw std::invalid_argument("QualificationMask::set: signal out of range");
        bits_ |= std::uint64_t{1} << s;
    }
    std::uint32_t count() const { return static_cast<std::uint32_t>(std::popcount(bits_)); }
    bool any() const { return bits_ != 0; }

    // Lowest qualified signal id; mask must be nonempty.
    SignalId first_set() const {
        if (bits_ == 0) throw std::logic_error("QualificationMask::first_set on empty mask");
        return static_cast<SignalId>(std::countr_zero(bits_));
    }

    // Qualified ids in ascending order.
    std::vector<SignalId> qualified() const {
        std::vector<SignalId> out;
        out.reserve(count());
        std::uint64_t b = bits_;
        while (b) {
            out.push_back(static_cast<SignalId>(std::countr_zero(b)));
            b &= b - 1;
        }
        return out;
    }

    bool operator==(const QualificationMask& o) const = default;
    // Canonical order (width, then bits): partition buckets and estimator
    // cells are always traversed in this order for determinism.
    bool operator<(const QualificationMask& o) const {
        if (width_ != o.width_) return width_ < o.width_;
        return bits_ < o.bits_;
    }

private:
    std::uint64_t bits_ = 0;
    std::uint32_t width_ = 0;
};

struct QualificationMaskHash {
    std::size_t operator()(const QualificationMask& m) const {
        std::uint64_t x = m.bits() + 0x9e3779b97f4a7c15ULL * (m.width() + 1);
        x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27; x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return static_cast<std::size_t>(x);
    }
};

// Which engagement indicator is the active outcome Y.
enum class TargetLabel { kBbowac, kBinOrBid, kPurchase };

const char* to_string(TargetLabel t);
TargetLabel target_from_string(const std::string& s);

// The three engagement indicators, jointly stored. A purchase implies a
// bin/bid action implies some BBOWAC action.
struct ConversionLabels {
    bool bbowac = false;
    bool bin_or_bid = false;
    bool purchase = false;

    bool monotone() const { return (!purchase || bin_or_bid) && (!bin_or_bid || bbowac); }
    bool value(TargetLabel t) const {
        switch (t) {
            case TargetLabel::kBbowac: return bbowac;
            case TargetLabel::kBinOrBid: return bin_or_bid;
            case TargetLabel::kPurchase: return purchase;
        }
        return false;
    }
};

// One logged VI page view.
struct Impression {
    std::uint64_t impression_id = 0;
    std::vector<double> features;  // listing-related, unitless after normalization
    QualificationMask qual;
    SignalId shown = 0;
    ConversionLabels conversion;
};

// Immutable impression log plus the signal catalog for one placement.
// Treated as read-only after construction; all operations take const refs.
struct Dataset {
    std::vector<Impression> impressions;
    std::vector<std::string> catalog;
    std::uint32_t feature_dim = 0;
    TargetLabel target = TargetLabel::kBbowac;

    std::size_t size() const { return impressions.size(); }
    std::uint32_t catalog_size() const { return static_cast<std::uint32_t>(catalog.size()); }
    bool y(const Impression& imp) const { return imp.conversion.value(target); }
};

// A signals ranking model: deterministic assignment of a qualified signal
// given the impression context. Implementations must return a signal whose
// qualification bit is set.
class RankingPolicy {
public:
    virtual ~RankingPolicy() = default;
    virtual SignalId assign(std::span<const double> features, const QualificationMask& qual) const = 0;
    // False when the assignment depends on the qualification mask alone;
    // lets true-value computations use the exact per-cell form.
    virtual bool feature_dependent() const { return true; }
};

// One broken dataset invariant. Violations are data, not failures.
struct Violation {
    std::uint64_t impression_id = 0;
    std::string rule;
    std::string detail;
};

}  // namespace signalrank
