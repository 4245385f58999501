#include "grasplab/metrics.hpp"

#include <sstream>

#include <json.hpp>

#include "grasplab/tensor.hpp"

namespace grasplab {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (auto v : counts) n += v;
    return n;
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& preds,
                                 const std::vector<std::size_t>& labels,
                                 std::size_t num_classes) {
    if (preds.size() != labels.size()) {
        throw ContractError("confusion_matrix: " + std::to_string(preds.size()) +
                            " predictions vs " + std::to_string(labels.size()) + " labels");
    }
    ConfusionMatrix cm;
    cm.num_classes = num_classes;
    cm.counts.assign(num_classes * num_classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] >= num_classes || preds[i] >= num_classes) {
            throw ContractError("confusion_matrix: index out of range at position " +
                                std::to_string(i));
        }
        ++cm.at(labels[i], preds[i]);
    }
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    const std::size_t L = cm.num_classes;
    if (L == 0 || cm.total() == 0) throw ContractError("compute_metrics: empty matrix");
    MetricsReport r;
    r.recall.resize(L);
    r.precision.resize(L);
    r.f1.resize(L);
    r.support.resize(L);
    std::int64_t trace = 0;
    double recall_sum = 0.0, f1_sum = 0.0;
    std::size_t supported = 0;
    for (std::size_t c = 0; c < L; ++c) {
        std::int64_t row = 0, col = 0;
        for (std::size_t k = 0; k < L; ++k) {
            row += cm.at(c, k);
            col += cm.at(k, c);
        }
        const std::int64_t tp = cm.at(c, c);
        trace += tp;
        r.support[c] = row;
        r.recall[c] = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        r.precision[c] = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        const double pr = r.precision[c] + r.recall[c];
        r.f1[c] = pr > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;
        if (row > 0) {
            ++supported;
            recall_sum += r.recall[c];
            f1_sum += r.f1[c];
        }
    }
    r.ga = static_cast<double>(trace) / static_cast<double>(cm.total());
    r.mrc = supported > 0 ? recall_sum / static_cast<double>(supported) : 0.0;
    r.mf1 = supported > 0 ? f1_sum / static_cast<double>(supported) : 0.0;
    return r;
}

std::string metrics_to_json(const MetricsReport& report, const std::string& task) {
    nlohmann::json j;
    j["task"] = task;
    j["ga"] = report.ga;
    j["mrc"] = report.mrc;
    j["mf1"] = report.mf1;
    j["recall"] = report.recall;
    j["precision"] = report.precision;
    j["f1"] = report.f1;
    j["support"] = report.support;
    return j.dump(2);
}

std::string metrics_csv_row(const MetricsReport& report, const std::string& task) {
    std::ostringstream os;
    os.precision(10);
    os << task << "," << report.ga << "," << report.mrc << "," << report.mf1;
    return os.str();
}

}  // namespace grasplab
