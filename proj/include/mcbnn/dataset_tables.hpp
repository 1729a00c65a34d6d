#pragma once

namespace mcbnn::tables {

struct IrisRow {
    double f[4];
    int label;
};

extern const IrisRow kIris[150];

} // namespace mcbnn::tables
