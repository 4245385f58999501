#pragma once

#include <string>
#include <vector>

namespace grasplab {

// Rows = true class, columns = predicted class.
struct ConfusionMatrix {
    std::size_t num_classes = 0;
    std::vector<std::int64_t> counts;  // row-major

    std::int64_t& at(std::size_t t, std::size_t p) { return counts[t * num_classes + p]; }
    std::int64_t at(std::size_t t, std::size_t p) const { return counts[t * num_classes + p]; }
    std::int64_t total() const;
};

struct MetricsReport {
    double ga = 0.0;   // global accuracy
    double mrc = 0.0;  // macro recall over supported classes
    double mf1 = 0.0;  // macro F1 over supported classes
    std::vector<double> recall;
    std::vector<double> precision;
    std::vector<double> f1;
    std::vector<std::int64_t> support;
};

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& preds,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t num_classes);

// Classes with zero support are excluded from the macro averages; a zero
// denominator precision counts as 0 inside F1.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

std::string metrics_to_json(const MetricsReport& report, const std::string& task);
std::string metrics_csv_row(const MetricsReport& report, const std::string& task);

}  // namespace grasplab
