#include "mcbnn/metrics.hpp"

namespace mcbnn {

Metrics compute_metrics(const std::vector<std::size_t>& predictions,
                        const std::vector<std::size_t>& labels, std::size_t n_classes) {
    require(predictions.size() == labels.size(), "predictions and labels differ in length");
    require(n_classes >= 1, "need at least one class");
    Metrics m;
    m.confusion = Matrix(n_classes, n_classes);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] < n_classes && predictions[i] < n_classes, "class index out of range");
        m.confusion(labels[i], predictions[i]) += 1.0;
        if (labels[i] == predictions[i]) ++correct;
    }
    m.accuracy = labels.empty() ? 0.0 : static_cast<double>(correct) / labels.size();

    double f1_sum = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        double tp = m.confusion(c, c), fp = 0, fn = 0;
        for (std::size_t k = 0; k < n_classes; ++k) {
            if (k == c) continue;
            fp += m.confusion(k, c);
            fn += m.confusion(c, k);
        }
        const double denom = 2 * tp + fp + fn;
        f1_sum += denom > 0 ? 2 * tp / denom : 0.0;
    }
    m.macro_f1 = f1_sum / static_cast<double>(n_classes);
    return m;
}

} // namespace mcbnn
