#pragma once

#include <cstdint>

namespace l3guard {

// Anomalous is the positive class; BlindDoS is positive ground truth.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }

    void add(bool truth_positive, bool predicted_positive)
    {
        if (truth_positive)
            ++(predicted_positive ? tp : fn);
        else
            ++(predicted_positive ? fp : tn);
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
};

/// Ratios with an empty denominator are reported as 0 (f1 too when
/// precision + recall == 0). Throws EmptyEvaluation when total() == 0.
Metrics compute_metrics(const ConfusionMatrix& cm);

} // namespace l3guard
