#include "mcbnn/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace mcbnn {

namespace {

double act_fn(Activation a, double r) {
    return a == Activation::tanh ? std::tanh(r) : 1.0 / (1.0 + std::exp(-r));
}

double act_deriv_from_value(Activation a, double s) {
    return a == Activation::tanh ? 1.0 - s * s : s * (1.0 - s);
}

std::vector<double> output_layer(OutputFn fn, const std::vector<double>& r) {
    if (fn == OutputFn::sigmoid) {
        std::vector<double> o(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) o[i] = 1.0 / (1.0 + std::exp(-r[i]));
        return o;
    }
    std::vector<double> o(r.size());
    const double m = *std::max_element(r.begin(), r.end());
    double z = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        o[i] = std::exp(r[i] - m);
        z += o[i];
    }
    for (auto& v : o) v /= z;
    return o;
}

std::vector<double> matvec_T(const Matrix& w, std::span<const double> in, double bias) {
    // r_j = bias*w(0,j) + sum_i in[i]*w(i+1,j)
    std::vector<double> r(w.cols(), 0.0);
    for (std::size_t j = 0; j < w.cols(); ++j) r[j] = bias * w(0, j);
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double v = in[i];
        for (std::size_t j = 0; j < w.cols(); ++j) r[j] += v * w(i + 1, j);
    }
    return r;
}

} // namespace

void DenseNet::validate() const {
    require(layer_sizes.size() >= 2, "network needs at least input and output layers");
    require(weights.size() + 1 == layer_sizes.size(), "one weight matrix per layer gap");
    for (std::size_t k = 0; k < weights.size(); ++k) {
        require(weights[k].rows() == layer_sizes[k] + 1, "weight rows must be inputs+1");
        require(weights[k].cols() == layer_sizes[k + 1], "weight cols must be outputs");
    }
    require(eta > 0, "learning rate must be positive");
}

DenseNet make_dense(const std::vector<std::size_t>& sizes, double eta, Activation act,
                    OutputFn out, Rng& rng, double w_lo, double w_hi) {
    DenseNet net;
    net.layer_sizes = sizes;
    net.hidden_act = act;
    net.output_fn = out;
    net.eta = eta;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        Matrix w(sizes[k] + 1, sizes[k + 1]);
        for (std::size_t i = 0; i < w.rows(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(w_lo, w_hi);
        net.weights.push_back(std::move(w));
    }
    net.validate();
    return net;
}

OracleTrace oracle_forward(const DenseNet& net, std::span<const double> x) {
    require(x.size() == net.layer_sizes.front(), "input dimension mismatch");
    OracleTrace tr;
    tr.act.emplace_back(x.begin(), x.end());
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        std::vector<double> r = matvec_T(net.weights[k], cur, net.bias_input);
        tr.pre.push_back(r);
        if (k + 1 < net.weights.size()) {
            for (auto& v : r) v = act_fn(net.hidden_act, v);
            cur = r;
            tr.act.push_back(cur);
        } else {
            tr.output = output_layer(net.output_fn, r);
        }
    }
    return tr;
}

std::vector<Matrix> oracle_backprop(const DenseNet& net, std::span<const double> x,
                                    std::span<const double> d, bool exact_gradient) {
    require(d.size() == net.layer_sizes.back(), "label dimension mismatch");
    const OracleTrace tr = oracle_forward(net, x);
    const std::size_t L = net.weights.size();
    std::vector<Matrix> dw(L);

    std::vector<double> y(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) y[j] = d[j] - tr.output[j];

    for (std::size_t k = L; k-- > 0;) {
        const auto& input = tr.act[k];
        Matrix g(net.weights[k].rows(), net.weights[k].cols());
        for (std::size_t j = 0; j < g.cols(); ++j) {
            g(0, j) = net.eta * net.bias_input * y[j];
            for (std::size_t i = 0; i < input.size(); ++i)
                g(i + 1, j) = net.eta * input[i] * y[j];
        }
        dw[k] = std::move(g);
        if (k == 0) break;
        // delta = W^T y (bias row excluded), then the activation chain
        const Matrix& w = net.weights[k];
        std::vector<double> delta(net.layer_sizes[k], 0.0);
        for (std::size_t i = 0; i < delta.size(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) delta[i] += w(i + 1, j) * y[j];
        std::vector<double> yn(delta.size());
        for (std::size_t i = 0; i < delta.size(); ++i) {
            const double sp = act_deriv_from_value(net.hidden_act, tr.act[k][i]);
            const double dd = (!exact_gradient && net.tanh_rescale) ? std::tanh(delta[i])
                                                                    : delta[i];
            yn[i] = dd * sp;
        }
        y = std::move(yn);
    }
    return dw;
}

void apply_updates(DenseNet& net, const std::vector<Matrix>& dw) {
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
        Matrix& w = net.weights[k];
        for (std::size_t i = 0; i < w.rows(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) {
                double v = w(i, j) + dw[k](i, j);
                if (net.weight_clip) v = std::clamp(v, net.weight_clip->first,
                                                    net.weight_clip->second);
                w(i, j) = v;
            }
    }
}

void oracle_train_step(DenseNet& net, std::span<const double> x, std::span<const double> d) {
    apply_updates(net, oracle_backprop(net, x, d));
}

double oracle_loss(const DenseNet& net, std::span<const double> o, std::span<const double> d) {
    if (net.output_fn == OutputFn::sigmoid) {
        // binary cross-entropy over independent sigmoid outputs
        double L = 0;
        for (std::size_t j = 0; j < o.size(); ++j) {
            const double p = std::clamp(o[j], 1e-12, 1.0 - 1e-12);
            L += -(d[j] * std::log(p) + (1.0 - d[j]) * std::log(1.0 - p));
        }
        return L;
    }
    double sum = 0;
    for (std::size_t j = 0; j < o.size(); ++j) sum += o[j];
    require(std::abs(sum - 1.0) < 1e-6, "output is not a probability vector");
    for (std::size_t j = 0; j < d.size(); ++j)
        if (d[j] > 0.5) return -std::log(std::max(o[j], 1e-12));
    throw std::invalid_argument("label is not one-hot");
}

double grad_check(const DenseNet& net, std::span<const double> x, std::span<const double> d,
                  double eps) {
    require(eps >= 1e-7 && eps <= 1e-3, "eps out of range");
    DenseNet work = net;
    work.tanh_rescale = false; // finite differences check the exact gradient
    const auto analytic = oracle_backprop(work, x, d, /*exact_gradient=*/true);

    double max_rel = 0;
    for (std::size_t k = 0; k < work.weights.size(); ++k) {
        Matrix& w = work.weights[k];
        for (std::size_t i = 0; i < w.rows(); ++i)
            for (std::size_t j = 0; j < w.cols(); ++j) {
                const double keep = w(i, j);
                w(i, j) = keep + eps;
                const OracleTrace hi = oracle_forward(work, x);
                w(i, j) = keep - eps;
                const OracleTrace lo = oracle_forward(work, x);
                w(i, j) = keep;
                const double fd = (oracle_loss(work, hi.output, d) -
                                   oracle_loss(work, lo.output, d)) / (2 * eps);
                // analytic dw = -eta * dL/dw
                const double an = -analytic[k](i, j) / work.eta;
                const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
                max_rel = std::max(max_rel, std::abs(fd - an) / denom);
            }
    }
    return max_rel;
}

} // namespace mcbnn
