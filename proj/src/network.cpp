#include "mcbnn/network.hpp"
#include "mcbnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace mcbnn {

void NetworkConfig::validate() const {
    require(layer_sizes.size() >= 2, "need at least input and output layers");
    for (auto s : layer_sizes) require(s >= 1, "layer sizes must be positive");
    if (output_fn == OutputFn::softmax)
        require(layer_sizes.back() >= 2, "softmax needs at least two outputs");
    require(R0 > 0, "R0 must be positive");
    require(kappa_scale > 0, "kappa_scale must be positive");
    require(epochs >= 1, "epochs must be >= 1");
    timing.validate();
}

namespace {

// characterization is deterministic per model; cache the simulated slopes
const DeviceCharacterization& characterized(const std::string& model_name) {
    static std::map<std::string, DeviceCharacterization> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(model_name);
    if (it != cache.end()) return it->second;
    const DeviceModel& m = builtin_model(model_name);
    DeviceCharacterization c = characterize(m.params, m.default_pulse);
    return cache.emplace(model_name, c).first->second;
}

double act_value(Activation a, double r) {
    return a == Activation::tanh ? std::tanh(r) : 1.0 / (1.0 + std::exp(-r));
}

double act_deriv(Activation a, double s) {
    return a == Activation::tanh ? 1.0 - s * s : s * (1.0 - s);
}

} // namespace

Calibration calibrate(const NetworkConfig& cfg) {
    const DeviceModel& model = builtin_model(cfg.model);
    const DeviceCharacterization sim = characterized(cfg.model);

    Calibration cal;
    // published bounds define the operating point; simulated slopes drive
    // the switch durations
    cal.model = model.published;
    cal.model.c1 = sim.c1;
    cal.model.c2 = sim.c2;

    const MemristorParams& p = model.params;
    const double target = 0.02 * (cal.model.G_lin_max - cal.model.G_lin_min);
    const double x_ref = state_for_conductance(p, cal.model.G_ref());
    const double v_q2 = cal.model.v_th_neg - cfg.encoding.a * cfg.encoding.x_max;

    // integrate the full-scale decreasing quarter until the target move
    DeviceState s{x_ref, &p};
    const double G0 = small_signal_conductance(s);
    double d_star = 0;
    const double h = cfg.model == "titania" ? 2e-6 : 2e-8;
    while (std::abs(small_signal_conductance(s) - G0) < target && d_star < 1.0) {
        s = device_step(s, v_q2, h);
        d_star += h;
    }

    double kappa = d_star / std::abs(cal.model.c2);
    const double cap = cfg.timing.quarter() / std::max(std::abs(cal.model.c1),
                                                       std::abs(cal.model.c2));
    kappa = std::min(kappa, cap) * cfg.kappa_scale;
    cal.kappa = kappa;

    // realized full-scale move with the final kappa
    DeviceState s2{x_ref, &p};
    s2 = device_step(s2, v_q2, kappa * std::abs(cal.model.c2));
    cal.dG_full = std::abs(small_signal_conductance(s2) - G0);
    cal.eta_eff = cfg.encoding.a * cfg.R0 * cal.dG_full / cfg.encoding.x_max;
    return cal;
}

Network::Network(const NetworkConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    cal_ = calibrate(cfg_);
    const DeviceModel& model = builtin_model(cfg_.model);
    EncodingConstants enc = cfg_.encoding;
    enc.kappa = cal_.kappa;
    for (std::size_t k = 0; k + 1 < cfg_.layer_sizes.size(); ++k) {
        CrossbarState cb = make_crossbar(cfg_.layer_sizes[k] + 1, cfg_.layer_sizes[k + 1],
                                         model, cfg_.R0, enc, cfg_.timing, rng,
                                         cfg_.init_G_lo, cfg_.init_G_hi);
        cb.model.c1 = cal_.model.c1;
        cb.model.c2 = cal_.model.c2;
        cbs_.push_back(std::move(cb));
    }
}

std::vector<double> Network::hidden_to_features(const std::vector<double>& act) const {
    // device mode re-encodes activations into the read-safe feature window
    std::vector<double> out(act.size());
    const double xm = cfg_.encoding.x_max;
    for (std::size_t i = 0; i < act.size(); ++i)
        out[i] = cfg_.hidden_act == Activation::tanh ? xm * act[i] : 2 * xm * act[i] - xm;
    return out;
}

std::pair<std::vector<double>, ForwardTrace> Network::infer(std::span<const double> x) const {
    require(x.size() == cfg_.layer_sizes.front(), "input dimension mismatch");
    ForwardTrace tr;
    std::vector<double> cur(x.begin(), x.end());
    for (std::size_t k = 0; k < cbs_.size(); ++k) {
        tr.layer_in.push_back(cur);
        std::vector<double> r;
        if (cfg_.mode == Mode::device) {
            r = forward_read(cbs_[k], cur);
        } else {
            const Matrix w = weights_dense(cbs_[k]);
            r.assign(w.cols(), 0.0);
            for (std::size_t j = 0; j < w.cols(); ++j) r[j] = cfg_.encoding.x_max * w(0, j);
            for (std::size_t i = 0; i < cur.size(); ++i)
                for (std::size_t j = 0; j < w.cols(); ++j) r[j] += cur[i] * w(i + 1, j);
        }
        tr.pre.push_back(r);
        if (k + 1 < cbs_.size()) {
            std::vector<double> s(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) s[i] = act_value(cfg_.hidden_act, r[i]);
            cur = (cfg_.mode == Mode::device) ? hidden_to_features(s) : s;
        } else {
            if (cfg_.output_fn == OutputFn::sigmoid) {
                tr.output.assign(r.size(), 0.0);
                for (std::size_t i = 0; i < r.size(); ++i)
                    tr.output[i] = 1.0 / (1.0 + std::exp(-r[i]));
            } else {
                const double m = *std::max_element(r.begin(), r.end());
                double z = 0;
                tr.output.assign(r.size(), 0.0);
                for (std::size_t i = 0; i < r.size(); ++i) {
                    tr.output[i] = std::exp(r[i] - m);
                    z += tr.output[i];
                }
                for (auto& v : tr.output) v /= z;
            }
        }
    }
    return {tr.output, tr};
}

std::vector<double> Network::train_step(std::span<const double> x, std::span<const double> d) {
    require(d.size() == cfg_.layer_sizes.back(), "label dimension mismatch");
    auto [o, tr] = infer(x);
    std::vector<double> y(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) y[j] = d[j] - o[j];
    const std::vector<double> y_out = y;
    std::vector<std::vector<double>> tanh_deltas(cbs_.size());

    for (std::size_t k = cbs_.size(); k-- > 0;) {
        CrossbarState& cb = cbs_[k];
        std::vector<double> delta;
        if (k > 0) {
            if (cfg_.mode == Mode::device) {
                std::vector<double> y_read(y.size());
                const double lim = cfg_.encoding.x_max;
                for (std::size_t j = 0; j < y.size(); ++j)
                    y_read[j] = std::clamp(y[j], -lim, lim);
                delta = backward_read(cb, y_read);
            } else {
                const Matrix w = weights_dense(cb);
                delta.assign(cb.rows, 0.0);
                for (std::size_t i = 0; i < cb.rows; ++i)
                    for (std::size_t j = 0; j < cb.cols; ++j) delta[i] += w(i, j) * y[j];
            }
            delta.erase(delta.begin()); // bias row carries no error
        }
        if (cfg_.mode == Mode::device)
            write_phase(cb, tr.layer_in[k], y);
        else
            write_phase_behavioral(cb, tr.layer_in[k], y, cal_.eta_eff);

        if (k > 0) {
            std::vector<double> yn(delta.size());
            std::vector<double> td(delta.size());
            for (std::size_t i = 0; i < delta.size(); ++i) {
                const double s = act_value(cfg_.hidden_act, tr.pre[k - 1][i]);
                td[i] = std::tanh(delta[i]);
                const double dd = cfg_.tanh_rescale ? td[i] : delta[i];
                yn[i] = dd * act_deriv(cfg_.hidden_act, s);
            }
            tanh_deltas[k] = std::move(td);
            y = std::move(yn);
        }
    }
    if (sink_) sink_(step_count_, tr, y_out, tanh_deltas);
    ++step_count_;
    return o;
}

double Network::loss(std::span<const double> o, std::span<const double> d) const {
    if (cfg_.output_fn == OutputFn::sigmoid) {
        double L = 0;
        for (std::size_t j = 0; j < o.size(); ++j) {
            const double p = std::clamp(o[j], 1e-12, 1.0 - 1e-12);
            L += -(d[j] * std::log(p) + (1.0 - d[j]) * std::log(1.0 - p));
        }
        return L;
    }
    for (std::size_t j = 0; j < d.size(); ++j)
        if (d[j] > 0.5) return -std::log(std::max(o[j], 1e-12));
    throw std::invalid_argument("label is not one-hot");
}

std::size_t predict_class(const std::vector<double>& o, OutputFn fn) {
    if (fn == OutputFn::sigmoid) return o[0] > 0.5 ? 1 : 0;
    return static_cast<std::size_t>(
        std::max_element(o.begin(), o.end()) - o.begin());
}

TrainReport Network::train(const Dataset& train_set, const Dataset& test_set,
                           std::size_t epochs, Rng& order_rng) {
    require(epochs >= 1, "epochs must be >= 1");
    require(train_set.size() > 0, "training set is empty");
    TrainReport rep;
    rep.seed = cfg_.seed;
    const std::size_t out_dim = cfg_.layer_sizes.back();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> xrow(train_set.n_features());

    for (std::size_t ep = 0; ep < epochs; ++ep) {
        order_rng.shuffle(order);
        double loss_sum = 0;
        for (const std::size_t i : order) {
            for (std::size_t f = 0; f < xrow.size(); ++f) xrow[f] = train_set.features(i, f);
            const std::vector<double> d = train_set.one_hot(i, out_dim);
            const std::vector<double> o = train_step(xrow, d);
            loss_sum += loss(o, d);
        }
        rep.epochs.push_back({loss_sum / static_cast<double>(train_set.size())});
    }

    auto evaluate = [&](const Dataset& ds, bool want_metrics) {
        std::vector<std::size_t> pred(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            for (std::size_t f = 0; f < xrow.size(); ++f) xrow[f] = ds.features(i, f);
            pred[i] = predict_class(infer(xrow).first, cfg_.output_fn);
        }
        const Metrics m = compute_metrics(pred, ds.labels, ds.n_classes);
        if (want_metrics) {
            rep.test_accuracy = m.accuracy;
            rep.test_macro_f1 = m.macro_f1;
            rep.confusion = m.confusion;
        }
        return m.accuracy;
    };
    rep.train_accuracy = evaluate(train_set, false);
    if (test_set.size() > 0) evaluate(test_set, true);

    for (const auto& cb : cbs_) {
        rep.audit.merge(cb.audit);
        rep.audit_pass = rep.audit_pass && cb.audit.pass(cb.model);
        Matrix g(cb.rows, cb.cols);
        for (std::size_t i = 0; i < cb.rows; ++i)
            for (std::size_t j = 0; j < cb.cols; ++j) g(i, j) = cb.G_of(i, j);
        rep.conductance.push_back(std::move(g));
    }
    double e = 0;
    std::size_t n_cells = 0;
    for (const auto& cb : cbs_) {
        if (cb.cell_energy.size() != cb.x.size()) continue;
        for (const double v : cb.cell_energy) e += v;
        n_cells += cb.cell_energy.size();
    }
    if (n_cells > 0) rep.energy_per_synapse = e / static_cast<double>(n_cells);
    return rep;
}

DenseNet Network::oracle_twin() const {
    DenseNet net;
    net.layer_sizes = cfg_.layer_sizes;
    net.hidden_act = cfg_.hidden_act;
    net.output_fn = cfg_.output_fn;
    net.eta = cal_.eta_eff;
    net.bias_input = cfg_.encoding.x_max;
    net.tanh_rescale = cfg_.tanh_rescale;
    for (const auto& cb : cbs_) net.weights.push_back(weights_dense(cb));
    const double a_r0 = cfg_.encoding.a * cfg_.R0;
    net.weight_clip = {{a_r0 * (cal_.model.G_ref() - cal_.model.G_lin_max),
                        a_r0 * (cal_.model.G_ref() - cal_.model.G_lin_min)}};
    net.validate();
    return net;
}

} // namespace mcbnn
