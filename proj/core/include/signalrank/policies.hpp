// Baseline policies.
#pragma once

#include <cstring>

#include "signalrank/rng.hpp"
#include "signalrank/types.hpp"

namespace signalrank {

// Uniform-random baseline: a deterministic function of (seed, features,
// mask) whose picks are uniform over the qualified signals across a log.
class UniformRandomPolicy : public RankingPolicy {
public:
    explicit UniformRandomPolicy(std::uint64_t seed) : seed_(seed) {}

    SignalId assign(std::span<const double> features, const QualificationMask& qual) const override {
        std::uint64_t h = mix64(seed_, qual.bits());
        for (double f : features) {
            std::uint64_t bits;
            std::memcpy(&bits, &f, sizeof bits);
            h = mix64(h, bits);
        }
        const std::uint32_t k = qual.count();
        std::uint32_t pick = static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(h) * k) >> 64);
        std::uint64_t b = qual.bits();
        while (pick--) b &= b - 1;
        return static_cast<SignalId>(std::countr_zero(b));
    }

    bool feature_dependent() const override { return true; }

private:
    std::uint64_t seed_;
};

// Always the same signal wherever it qualifies; first qualified in a fixed
// preference order otherwise.
class ConstantPolicy : public RankingPolicy {
public:
    explicit ConstantPolicy(SignalId signal) : signal_(signal) {}

    SignalId assign(std::span<const double>, const QualificationMask& qual) const override {
        if (qual.test(signal_)) return signal_;
        return qual.first_set();
    }

    bool feature_dependent() const override { return false; }

private:
    SignalId signal_;
};

}  // namespace signalrank
