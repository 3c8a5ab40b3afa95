#include "signalrank/retro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "signalrank/rng.hpp"

namespace signalrank {

namespace {

constexpr std::uint64_t kSampleStream = 0x72730001;
constexpr std::uint64_t kEpochStream = 0x72650002;

// Softmax probabilities for one row; returns the row's cross-entropy.
inline double row_probs(const double* xr, std::size_t width, std::size_t classes,
                        const double* w, const double* b, SignalId label, double* probs) {
    double mx = -1e300;
    for (std::size_t c = 0; c < classes; ++c) {
        double s = b[c];
        const double* wc = w + c * width;
        for (std::size_t j = 0; j < width; ++j) s += wc[j] * xr[j];
        probs[c] = s;
        if (s > mx) mx = s;
    }
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        probs[c] = std::exp(probs[c] - mx);
        denom += probs[c];
    }
    for (std::size_t c = 0; c < classes; ++c) probs[c] /= denom;
    return -std::log(std::max(probs[label], 1e-300));
}

// Picks `take` distinct elements from `pool` (uniform, seeded) and returns
// them in their original order.
std::vector<std::size_t> sample_without_replacement(const std::vector<std::size_t>& pool,
                                                    std::size_t take, Rng& rng) {
    std::vector<std::size_t> shuffled = pool;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
    shuffled.resize(take);
    std::sort(shuffled.begin(), shuffled.end());
    return shuffled;
}

}  // namespace

RetroTrainingSet build_training_set(const Dataset& d, std::uint64_t seed) {
    std::vector<std::size_t> positives, negatives;
    for (std::size_t i = 0; i < d.impressions.size(); ++i)
        (d.y(d.impressions[i]) ? positives : negatives).push_back(i);
    if (positives.empty() || negatives.empty())
        throw std::invalid_argument(
            "build_training_set: need at least one positive and one negative impression");

    Rng rng = derive_rng(seed, kSampleStream);
    const std::size_t per_side = std::min(positives.size(), negatives.size());
    if (positives.size() > per_side) positives = sample_without_replacement(positives, per_side, rng);
    if (negatives.size() > per_side) negatives = sample_without_replacement(negatives, per_side, rng);

    std::vector<std::size_t> chosen;
    chosen.reserve(2 * per_side);
    chosen.insert(chosen.end(), positives.begin(), positives.end());
    chosen.insert(chosen.end(), negatives.begin(), negatives.end());
    std::sort(chosen.begin(), chosen.end());

    RetroTrainingSet t;
    t.feature_dim = d.feature_dim;
    t.catalog_size = d.catalog_size();
    t.width = t.feature_dim + t.catalog_size + std::size_t{1};
    t.rows = chosen.size();
    t.x.assign(t.rows * t.width, 0.0);
    t.labels.reserve(t.rows);
    t.positive.reserve(t.rows);

    for (std::size_t r = 0; r < chosen.size(); ++r) {
        const Impression& imp = d.impressions[chosen[r]];
        double* xr = t.x.data() + r * t.width;
        for (std::uint32_t j = 0; j < t.feature_dim; ++j) xr[j] = imp.features[j];
        for (std::uint32_t s = 0; s < t.catalog_size; ++s)
            xr[t.feature_dim + s] = imp.qual.test(s) ? 1.0 : 0.0;
        const bool y = d.y(imp);
        xr[t.width - 1] = y ? 1.0 : 0.0;
        t.labels.push_back(imp.shown);
        t.positive.push_back(y ? 1 : 0);
    }
    return t;
}

double softmax_ce_loss_grad(const double* x, const SignalId* labels, std::size_t rows,
                            std::size_t width, std::size_t classes, const double* w,
                            const double* b, double l2, double* grad_w, double* grad_b) {
    if (grad_w) std::fill(grad_w, grad_w + classes * width, 0.0);
    if (grad_b) std::fill(grad_b, grad_b + classes, 0.0);

    std::vector<double> probs(classes);
    double loss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * width;
        loss += row_probs(xr, width, classes, w, b, labels[r], probs.data());
        if (!grad_w) continue;
        for (std::size_t c = 0; c < classes; ++c) {
            const double g = probs[c] - (c == labels[r] ? 1.0 : 0.0);
            grad_b[c] += g;
            double* gw = grad_w + c * width;
            for (std::size_t j = 0; j < width; ++j) gw[j] += g * xr[j];
        }
    }

    const double inv_n = rows > 0 ? 1.0 / static_cast<double>(rows) : 0.0;
    loss *= inv_n;
    double penalty = 0.0;
    for (std::size_t i = 0; i < classes * width; ++i) penalty += w[i] * w[i];
    loss += 0.5 * l2 * penalty;

    if (grad_w) {
        for (std::size_t i = 0; i < classes * width; ++i)
            grad_w[i] = grad_w[i] * inv_n + l2 * w[i];
        for (std::size_t c = 0; c < classes; ++c) grad_b[c] *= inv_n;
    }
    return loss;
}

RetroModel fit_retro(const RetroTrainingSet& t, const RetroConfig& config) {
    if (t.rows == 0) throw std::invalid_argument("fit_retro: empty training set");
    if (config.batch_size == 0 || config.epochs == 0 || config.learning_rate <= 0.0)
        throw std::invalid_argument("fit_retro: bad hyperparameters");
    {
        std::vector<bool> seen(t.catalog_size, false);
        std::size_t distinct = 0;
        for (SignalId s : t.labels) {
            if (s >= t.catalog_size) throw std::invalid_argument("fit_retro: label out of range");
            if (!seen[s]) { seen[s] = true; ++distinct; }
        }
        if (distinct < 2)
            throw std::invalid_argument("fit_retro: need at least 2 distinct labels");
    }

    RetroModel m;
    m.feature_dim = t.feature_dim;
    m.catalog_size = t.catalog_size;
    m.config = config;
    m.weights.assign(std::size_t{t.catalog_size} * t.width, 0.0);
    m.bias.assign(t.catalog_size, 0.0);

    // Standardize the continuous listing features in a working copy;
    // indicator columns stay 0/1.
    m.feature_mean.assign(t.feature_dim, 0.0);
    m.feature_std.assign(t.feature_dim, 1.0);
    std::vector<double> x = t.x;
    for (std::uint32_t j = 0; j < t.feature_dim; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < t.rows; ++r) mean += x[r * t.width + j];
        mean /= static_cast<double>(t.rows);
        double var = 0.0;
        for (std::size_t r = 0; r < t.rows; ++r) {
            const double dlt = x[r * t.width + j] - mean;
            var += dlt * dlt;
        }
        var /= static_cast<double>(t.rows);
        const double sd = std::sqrt(var);
        m.feature_mean[j] = mean;
        m.feature_std[j] = sd > 1e-12 ? sd : 1.0;
        for (std::size_t r = 0; r < t.rows; ++r)
            x[r * t.width + j] = (x[r * t.width + j] - mean) / m.feature_std[j];
    }

    const std::size_t classes = t.catalog_size;
    const std::size_t width = t.width;
    std::vector<std::size_t> order(t.rows);
    for (std::size_t i = 0; i < t.rows; ++i) order[i] = i;
    std::vector<double> probs(classes);
    std::vector<double> grad_w(classes * width);
    std::vector<double> grad_b(classes);

    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng = derive_rng(config.seed, kEpochStream, epoch);
        for (std::size_t i = t.rows; i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        for (std::size_t start = 0; start < t.rows; start += config.batch_size) {
            const std::size_t end = std::min<std::size_t>(start + config.batch_size, t.rows);
            const double inv_n = 1.0 / static_cast<double>(end - start);

            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t i = start; i < end; ++i) {
                const double* xr = x.data() + order[i] * width;
                batch_loss += row_probs(xr, width, classes, m.weights.data(), m.bias.data(),
                                        t.labels[order[i]], probs.data());
                for (std::size_t c = 0; c < classes; ++c) {
                    const double g = probs[c] - (c == t.labels[order[i]] ? 1.0 : 0.0);
                    grad_b[c] += g;
                    double* gw = grad_w.data() + c * width;
                    for (std::size_t j = 0; j < width; ++j) gw[j] += g * xr[j];
                }
            }

            if (!std::isfinite(batch_loss))
                throw std::runtime_error(
                    "fit_retro: non-finite loss at epoch " + std::to_string(epoch) +
                    "; try a smaller learning_rate");

            for (std::size_t i = 0; i < classes * width; ++i)
                m.weights[i] -= config.learning_rate * (grad_w[i] * inv_n + config.l2 * m.weights[i]);
            for (std::size_t c = 0; c < classes; ++c)
                m.bias[c] -= config.learning_rate * grad_b[c] * inv_n;
        }
    }

    m.final_loss = softmax_ce_loss_grad(x.data(), t.labels.data(), t.rows, width, classes,
                                        m.weights.data(), m.bias.data(), config.l2, nullptr,
                                        nullptr);
    if (!std::isfinite(m.final_loss))
        throw std::runtime_error("fit_retro: training diverged; try a smaller learning_rate");
    return m;
}

std::vector<double> RetroModel::class_scores(std::span<const double> features,
                                             const QualificationMask& qual) const {
    if (features.size() != feature_dim)
        throw std::invalid_argument("RetroModel: feature vector length mismatch");
    std::vector<double> x(width(), 0.0);
    for (std::uint32_t j = 0; j < feature_dim; ++j)
        x[j] = (features[j] - feature_mean[j]) / feature_std[j];
    for (std::uint32_t s = 0; s < catalog_size; ++s)
        x[feature_dim + s] = qual.test(s) ? 1.0 : 0.0;
    x[width() - 1] = 1.0;  // inference assumes the conversion took place

    std::vector<double> scores(catalog_size);
    for (std::uint32_t c = 0; c < catalog_size; ++c) {
        double s = bias[c];
        const double* wc = weights.data() + std::size_t{c} * width();
        for (std::size_t j = 0; j < width(); ++j) s += wc[j] * x[j];
        scores[c] = s;
    }
    return scores;
}

std::vector<double> RetroModel::predict_probabilities(std::span<const double> features,
                                                      const QualificationMask& qual) const {
    std::vector<double> scores = class_scores(features, qual);
    const double mx = *std::max_element(scores.begin(), scores.end());
    double denom = 0.0;
    for (double& s : scores) {
        s = std::exp(s - mx);
        denom += s;
    }
    for (double& s : scores) s /= denom;
    return scores;
}

SignalId RetroModel::assign(std::span<const double> features, const QualificationMask& qual) const {
    if (!qual.any()) throw std::invalid_argument("RetroModel::assign: empty qualification mask");
    std::vector<double> scores = class_scores(features, qual);
    SignalId best = qual.first_set();
    for (SignalId s : qual.qualified())
        if (scores[s] > scores[best]) best = s;
    return best;
}

}  // namespace signalrank
