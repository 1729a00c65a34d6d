#include "mcbnn/dataset.hpp"
#include "mcbnn/dataset_tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mcbnn {

std::vector<double> Dataset::one_hot(std::size_t i, std::size_t width) const {
    std::vector<double> d(width, 0.0);
    if (width == 1) {
        d[0] = labels[i] == 1 ? 1.0 : 0.0;
    } else {
        require(labels[i] < width, "label exceeds output width");
        d[labels[i]] = 1.0;
    }
    return d;
}

namespace {

void normalize_features(Dataset& ds, double x_max) {
    const std::size_t n = ds.size(), f = ds.n_features();
    ds.norm.min.assign(f, 0.0);
    ds.norm.max.assign(f, 0.0);
    ds.norm.lo = -x_max;
    ds.norm.hi = x_max;
    for (std::size_t c = 0; c < f; ++c) {
        double lo = ds.features(0, c), hi = lo;
        for (std::size_t r = 1; r < n; ++r) {
            lo = std::min(lo, ds.features(r, c));
            hi = std::max(hi, ds.features(r, c));
        }
        ds.norm.min[c] = lo;
        ds.norm.max[c] = hi;
        const double span = hi > lo ? hi - lo : 1.0;
        for (std::size_t r = 0; r < n; ++r)
            ds.features(r, c) = (ds.features(r, c) - lo) / span * (2 * x_max) - x_max;
    }
}

void shuffle_rows(Dataset& ds, std::uint64_t seed) {
    Rng rng(seed ^ 0x5eedULL);
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    Matrix f(ds.size(), ds.n_features());
    std::vector<std::size_t> lab(ds.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        lab[r] = ds.labels[order[r]];
        for (std::size_t c = 0; c < ds.n_features(); ++c)
            f(r, c) = ds.features(order[r], c);
    }
    ds.features = std::move(f);
    ds.labels = std::move(lab);
}

Dataset builtin_xor(double x_max) {
    Dataset ds;
    ds.name = "xor";
    ds.features = Matrix(4, 2);
    const double v[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 2; ++j) ds.features(i, j) = v[i][j];
    ds.labels = {0, 1, 1, 0};
    ds.n_classes = 2;
    normalize_features(ds, x_max);
    return ds;
}

Dataset builtin_iris(double x_max, std::uint64_t seed) {
    Dataset ds;
    ds.name = "iris";
    ds.features = Matrix(150, 4);
    ds.labels.resize(150);
    for (std::size_t i = 0; i < 150; ++i) {
        for (std::size_t j = 0; j < 4; ++j) ds.features(i, j) = tables::kIris[i].f[j];
        ds.labels[i] = static_cast<std::size_t>(tables::kIris[i].label);
    }
    ds.n_classes = 3;
    normalize_features(ds, x_max);
    shuffle_rows(ds, seed);
    return ds;
}

// Procedural 10-class 28x28 image set: one blurred stroke template per
// digit class, randomly shifted and noised. A stand-in with the MNIST
// topology for scalability runs when the real data set is not on disk.
Dataset builtin_synth_digits(double x_max, std::uint64_t seed, std::size_t n_samples) {
    constexpr int W = 28;
    Dataset ds;
    ds.name = "synth-digits";
    ds.features = Matrix(n_samples, W * W);
    ds.labels.resize(n_samples);
    Rng rng(seed ^ 0xd16175ULL);

    // class templates: coarse 7x7 glyph masks upscaled to 28x28
    static const char* glyphs[10] = {
        ".XXXXX."
        "XX...XX"
        "XX...XX"
        "XX...XX"
        "XX...XX"
        "XX...XX"
        ".XXXXX.",
        "...XX.."
        "..XXX.."
        "...XX.."
        "...XX.."
        "...XX.."
        "...XX.."
        ".XXXXXX",
        ".XXXXX."
        "X....XX"
        "....XX."
        "...XX.."
        "..XX..."
        ".XX...."
        "XXXXXXX",
        "XXXXXX."
        ".....XX"
        ".XXXXX."
        ".....XX"
        ".....XX"
        "X....XX"
        "XXXXXX.",
        "...XXX."
        "..XXXX."
        ".XX.XX."
        "XX..XX."
        "XXXXXXX"
        "....XX."
        "....XX.",
        "XXXXXXX"
        "XX....."
        "XXXXXX."
        "......X"
        "......X"
        "XX....X"
        ".XXXXX.",
        ".XXXXX."
        "XX....."
        "XXXXXX."
        "XX...XX"
        "XX...XX"
        "XX...XX"
        ".XXXXX.",
        "XXXXXXX"
        ".....XX"
        "....XX."
        "...XX.."
        "..XX..."
        ".XX...."
        ".XX....",
        ".XXXXX."
        "XX...XX"
        ".XXXXX."
        "XX...XX"
        "XX...XX"
        "XX...XX"
        ".XXXXX.",
        ".XXXXX."
        "XX...XX"
        "XX...XX"
        ".XXXXXX"
        "......X"
        ".....XX"
        ".XXXXX."};

    std::vector<double> img(W * W);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const std::size_t cls = s % 10;
        ds.labels[s] = cls;
        std::fill(img.begin(), img.end(), 0.0);
        const int dx = static_cast<int>(rng.below(5)) - 2;
        const int dy = static_cast<int>(rng.below(5)) - 2;
        for (int gy = 0; gy < 7; ++gy)
            for (int gx = 0; gx < 7; ++gx) {
                if (glyphs[cls][gy * 7 + gx] != 'X') continue;
                for (int py = 0; py < 4; ++py)
                    for (int px = 0; px < 4; ++px) {
                        const int x = gx * 4 + px + dx, y = gy * 4 + py + dy;
                        if (x >= 0 && x < W && y >= 0 && y < W) img[y * W + x] = 1.0;
                    }
            }
        for (std::size_t k = 0; k < img.size(); ++k) {
            const double noise = 0.25 * (rng.uniform() - 0.5);
            ds.features(s, k) = std::clamp(img[k] + noise, 0.0, 1.0);
        }
    }
    ds.n_classes = 10;
    normalize_features(ds, x_max);
    shuffle_rows(ds, seed);
    return ds;
}

Dataset load_csv(const std::string& path, double x_max, std::uint64_t seed) {
    std::ifstream in(path);
    require(in.good(), "cannot open dataset file: " + path);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "dataset file is empty: " + path);

    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> labels;
    std::size_t width = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            require(end != cell.c_str() && std::isfinite(v),
                    "non-numeric cell at line " + std::to_string(line_no) + " in " + path);
            vals.push_back(v);
        }
        require(vals.size() >= 2, "need at least one feature and a label column");
        if (width == 0) width = vals.size();
        require(vals.size() == width, "ragged row at line " + std::to_string(line_no));
        const double lab = vals.back();
        vals.pop_back();
        require(lab >= 0 && lab == std::floor(lab), "label must be a nonnegative integer");
        labels.push_back(static_cast<std::size_t>(lab));
        rows.push_back(std::move(vals));
    }
    require(!rows.empty(), "dataset has no data rows: " + path);

    Dataset ds;
    ds.name = path;
    ds.features = Matrix(rows.size(), width - 1);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c + 1 < width; ++c) ds.features(r, c) = rows[r][c];
    ds.labels = std::move(labels);
    ds.n_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    normalize_features(ds, x_max);
    shuffle_rows(ds, seed);
    return ds;
}

} // namespace

Dataset load_dataset(const std::string& path_or_builtin, double x_max, std::uint64_t seed,
                     std::size_t synth_samples) {
    if (path_or_builtin == "xor") return builtin_xor(x_max);
    if (path_or_builtin == "iris") return builtin_iris(x_max, seed);
    if (path_or_builtin == "synth-digits")
        return builtin_synth_digits(x_max, seed, synth_samples);
    return load_csv(path_or_builtin, x_max, seed);
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed) {
    require(train_fraction > 0 && train_fraction < 1, "train fraction must be in (0,1)");
    Rng rng(seed ^ 0x5711fULL);
    std::vector<std::size_t> tr_idx, te_idx;
    for (std::size_t c = 0; c < d.n_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.labels[i] == c) members.push_back(i);
        rng.shuffle(members);
        const auto k = static_cast<std::size_t>(train_fraction * members.size());
        tr_idx.insert(tr_idx.end(), members.begin(), members.begin() + k);
        te_idx.insert(te_idx.end(), members.begin() + k, members.end());
    }
    rng.shuffle(tr_idx);
    rng.shuffle(te_idx);

    auto take = [&](const std::vector<std::size_t>& idx, const std::string& tag) {
        Dataset out;
        out.name = d.name + tag;
        out.n_classes = d.n_classes;
        out.norm = d.norm;
        out.features = Matrix(idx.size(), d.n_features());
        out.labels.resize(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            out.labels[r] = d.labels[idx[r]];
            for (std::size_t c = 0; c < d.n_features(); ++c)
                out.features(r, c) = d.features(idx[r], c);
        }
        return out;
    };
    return {take(tr_idx, ":train"), take(te_idx, ":test")};
}

} // namespace mcbnn
