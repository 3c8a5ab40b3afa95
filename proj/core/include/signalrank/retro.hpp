// Retrospective learning: a multinomial logistic classifier predicting the
// shown signal from (listing features, qualification indicators, conversion
// indicator), trained on a conversion-balanced sample and applied with the
// conversion feature forced to 1.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "signalrank/types.hpp"

namespace signalrank {

struct RetroTrainingSet {
    std::size_t rows = 0;
    std::size_t width = 0;  // feature_dim + catalog_size + 1 (conversion bit)
    std::uint32_t feature_dim = 0;
    std::uint32_t catalog_size = 0;
    std::vector<double> x;               // rows * width, row-major
    std::vector<SignalId> labels;        // shown signal per row
    std::vector<std::uint8_t> positive;  // provenance: 1 = conversion row

    std::span<const double> row(std::size_t i) const {
        return {x.data() + i * width, width};
    }
};

// All positives plus an equal number of negatives sampled uniformly without
// replacement (symmetric downsampling when negatives are scarcer). The
// conversion bit in each row is the impression's actual outcome.
RetroTrainingSet build_training_set(const Dataset& d, std::uint64_t seed);

struct RetroConfig {
    std::uint32_t epochs = 200;
    double learning_rate = 0.1;
    double l2 = 1e-4;
    std::uint32_t batch_size = 256;
    std::uint64_t seed = 0;
};

class RetroModel : public RankingPolicy {
public:
    std::vector<std::string> catalog;
    std::uint32_t feature_dim = 0;
    std::uint32_t catalog_size = 0;
    std::vector<double> weights;  // catalog_size x width, row-major
    std::vector<double> bias;     // catalog_size
    // Standardization of the continuous listing features; indicator columns
    // stay raw. Stored here so serialized models are self-contained.
    std::vector<double> feature_mean;
    std::vector<double> feature_std;
    RetroConfig config;
    double final_loss = 0.0;

    std::size_t width() const { return feature_dim + catalog_size + std::size_t{1}; }

    // Class scores with conversion forced to 1 and the impression's
    // qualification indicators in place.
    std::vector<double> class_scores(std::span<const double> features,
                                     const QualificationMask& qual) const;
    std::vector<double> predict_probabilities(std::span<const double> features,
                                              const QualificationMask& qual) const;

    // Argmax over qualified classes only; ties break to the lowest SignalId.
    SignalId assign(std::span<const double> features, const QualificationMask& qual) const override;
    bool feature_dependent() const override { return true; }
};

// Deterministic mini-batch gradient descent on softmax cross-entropy with an
// L2 penalty on the weights. Aborts with a diagnostic if the loss leaves the
// finite range.
RetroModel fit_retro(const RetroTrainingSet& t, const RetroConfig& config);

// Mean softmax cross-entropy plus 0.5*l2*||w||^2 over a contiguous row
// block; fills grad_w / grad_b when non-null. Exposed so tests can check the
// analytic gradient against finite differences.
double softmax_ce_loss_grad(const double* x, const SignalId* labels, std::size_t rows,
                            std::size_t width, std::size_t classes, const double* w,
                            const double* b, double l2, double* grad_w, double* grad_b);

}  // namespace signalrank
