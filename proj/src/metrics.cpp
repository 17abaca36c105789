#include "sfrlab/metrics.hpp"

#include <cmath>

namespace sfrlab {

ConfusionCounts confusion_counts(const std::vector<std::uint8_t>& pred,
                                 const std::vector<std::uint8_t>& gt) {
    if (pred.size() != gt.size())
        throw MetricsError("confusion_counts: mask sizes differ");
    if (pred.empty()) throw MetricsError("confusion_counts: empty masks");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] > 1 || gt[i] > 1)
            throw MetricsError("confusion_counts: masks must be 0/1");
        if (pred[i] && gt[i])
            ++c.tp;
        else if (pred[i] && !gt[i])
            ++c.fp;
        else if (!pred[i] && gt[i])
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

double iou(const ConfusionCounts& counts) {
    const std::int64_t u = counts.tp + counts.fp + counts.fn;
    if (u == 0) throw MetricsError("iou: empty union (no positives in either mask)");
    return static_cast<double>(counts.tp) / static_cast<double>(u);
}

std::vector<double> class_weights(const std::vector<double>& frequencies, double c) {
    if (frequencies.empty()) throw MetricsError("class_weights: no frequencies");
    double sum = 0;
    for (double p : frequencies) {
        if (p < 0 || p > 1) throw MetricsError("class_weights: frequencies must be in [0,1]");
        if (p + c <= 1) throw MetricsError("class_weights: P + c must exceed 1");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw MetricsError("class_weights: frequencies must sum to 1");
    std::vector<double> w;
    w.reserve(frequencies.size());
    for (double p : frequencies) w.push_back(1.0 / std::log(p + c));
    return w;
}

double poly_lr(double base, std::int64_t iter, std::int64_t max_iter, double power) {
    if (max_iter < 1) throw MetricsError("poly_lr: max_iter must be >= 1");
    if (iter < 0 || iter > max_iter) throw MetricsError("poly_lr: iter out of [0, max_iter]");
    return base * std::pow(1.0 - static_cast<double>(iter) / max_iter, power);
}

CrossEntropyResult weighted_cross_entropy(
    const std::vector<std::vector<double>>& probabilities, const std::vector<int>& target,
    const std::vector<double>& weights) {
    if (probabilities.empty()) throw MetricsError("cross_entropy: no pixels");
    if (probabilities.size() != target.size())
        throw MetricsError("cross_entropy: probabilities/target size mismatch");

    CrossEntropyResult result;
    double total = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const auto& p = probabilities[i];
        if (p.size() != weights.size())
            throw MetricsError("cross_entropy: class count mismatch at pixel " +
                               std::to_string(i));
        double sum = 0;
        for (double v : p) {
            if (v < 0) throw MetricsError("cross_entropy: negative probability");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-5)
            throw MetricsError("cross_entropy: probabilities do not sum to 1 at pixel " +
                               std::to_string(i));
        const int t = target[i];
        if (t < 0 || static_cast<std::size_t>(t) >= p.size())
            throw MetricsError("cross_entropy: target class out of range at pixel " +
                               std::to_string(i));
        double pt = p[t];
        if (pt < 1e-12) {
            pt = 1e-12;
            ++result.clamped_pixels;
        }
        total += weights[t] * -std::log(pt);
    }
    result.loss = total / static_cast<double>(probabilities.size());
    return result;
}

} // namespace sfrlab
