#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sfrlab {

struct MetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// TP/FP/FN/TN pixel tallies; positive class is 1 (building).
struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::int64_t total() const { return tp + fp + fn + tn; }
};

/// Masks are flat arrays of 0/1 values with identical dimensions.
ConfusionCounts confusion_counts(const std::vector<std::uint8_t>& pred,
                                 const std::vector<std::uint8_t>& gt);

/// Jaccard index tp / (tp + fp + fn); throws on an empty union.
double iou(const ConfusionCounts& counts);

/// w_k = 1 / ln(P_k + c); frequencies in [0,1] summing to 1, each P + c > 1.
std::vector<double> class_weights(const std::vector<double>& frequencies, double c = 1.12);

/// base * (1 - iter/max_iter)^power.
double poly_lr(double base, std::int64_t iter, std::int64_t max_iter, double power = 0.9);

/// Mean over pixels of w_target * (-ln p[target]); probabilities per pixel
/// must be positive and sum to 1 within 1e-5. Zero probabilities at target
/// pixels are clamped at 1e-12 and counted in clamped_pixels.
struct CrossEntropyResult {
    double loss = 0;
    std::int64_t clamped_pixels = 0;
};
CrossEntropyResult weighted_cross_entropy(const std::vector<std::vector<double>>& probabilities,
                                          const std::vector<int>& target,
                                          const std::vector<double>& weights);

} // namespace sfrlab
