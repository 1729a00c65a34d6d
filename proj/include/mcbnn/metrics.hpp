#pragma once

#include "mcbnn/common.hpp"

#include <cstddef>
#include <vector>

namespace mcbnn {

struct Metrics {
    double accuracy = 0;
    double macro_f1 = 0;
    Matrix confusion; // [truth][prediction]
};

Metrics compute_metrics(const std::vector<std::size_t>& predictions,
                        const std::vector<std::size_t>& labels, std::size_t n_classes);

} // namespace mcbnn
