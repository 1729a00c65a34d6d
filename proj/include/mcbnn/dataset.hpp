#pragma once

#include "mcbnn/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mcbnn {

struct NormalizationRecord {
    std::vector<double> min;
    std::vector<double> max;
    double lo = 0, hi = 0; // target range
};

struct Dataset {
    std::string name;
    Matrix features;              // samples x features, normalized
    std::vector<std::size_t> labels;
    std::size_t n_classes = 0;
    NormalizationRecord norm;

    std::size_t size() const { return labels.size(); }
    std::size_t n_features() const { return features.cols(); }
    std::vector<double> one_hot(std::size_t i, std::size_t width) const;
};

// Builtins: "xor" (4 canonical points), "iris" (embedded 150x4),
// "synth-digits" (seeded 28x28 10-class surrogate; see docs). Anything else
// is treated as a CSV path: header row, numeric feature columns, final
// integer label column. Features are min-max normalized to [-x_max, x_max]
// and samples are shuffled with the seed.
Dataset load_dataset(const std::string& path_or_builtin, double x_max, std::uint64_t seed,
                     std::size_t synth_samples = 1000);

// Stratified split; fractions refer to the training share.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed);

} // namespace mcbnn
