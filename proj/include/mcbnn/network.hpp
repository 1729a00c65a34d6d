#pragma once

#include "mcbnn/crossbar.hpp"
#include "mcbnn/dataset.hpp"
#include "mcbnn/oracle.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mcbnn {

enum class Mode { device, behavioral };

struct NetworkConfig {
    std::vector<std::size_t> layer_sizes; // e.g. 4,4,3
    Activation hidden_act = Activation::sigmoid;
    OutputFn output_fn = OutputFn::softmax; // sigmoid for single-output nets
    std::string model = "silver";
    Mode mode = Mode::device;
    Timing timing;
    EncodingConstants encoding;     // kappa filled from calibration when 0
    double R0 = 10e3;
    double kappa_scale = 1.0;       // multiplier on the calibrated kappa
    double init_G_lo = 0;           // 0 = model default
    double init_G_hi = 0;
    bool tanh_rescale = true;
    std::uint64_t seed = 1;
    std::size_t epochs = 100;

    void validate() const;
};

// Calibration derived once per (model, config): switch-duration scale and
// the equivalent behavioral learning rate.
struct Calibration {
    double kappa = 0;     // [s per (S/s)]
    double dG_full = 0;   // conductance moved by one full-scale update [S]
    double eta_eff = 0;   // a * R0 * dG_full / x_max
    DeviceCharacterization model;
};

// Computes kappa so a full-scale update (|x| = x_max, |y| = 1) moves a cell
// at the reference conductance by 2% of the linear span, capped so every
// duration fits its quarter, then scaled by cfg.kappa_scale.
Calibration calibrate(const NetworkConfig& cfg);

struct ForwardTrace {
    std::vector<std::vector<double>> pre;       // r per layer
    std::vector<std::vector<double>> layer_in;  // inputs fed to each crossbar
    std::vector<double> output;
};

struct EpochStats {
    double mean_loss = 0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double train_accuracy = 0;
    double test_accuracy = 0;
    double test_macro_f1 = 0;
    Matrix confusion;
    PhaseAudit audit;
    bool audit_pass = true;
    std::uint64_t seed = 0;
    std::vector<Matrix> conductance; // final snapshot per layer
    double energy_per_synapse = 0;   // [J], 0 unless traced
};

class Network {
public:
    Network(const NetworkConfig& cfg, Rng& rng);

    const NetworkConfig& config() const { return cfg_; }
    const Calibration& calibration() const { return cal_; }
    std::vector<CrossbarState>& crossbars() { return cbs_; }
    const std::vector<CrossbarState>& crossbars() const { return cbs_; }

    std::pair<std::vector<double>, ForwardTrace> infer(std::span<const double> x) const;
    // one online update; returns the pre-update output for loss bookkeeping
    std::vector<double> train_step(std::span<const double> x, std::span<const double> d);
    double loss(std::span<const double> o, std::span<const double> d) const;

    // Per-step signal trace sink (r, activations, o, y, tanh-delta per layer).
    using SignalSink =
        std::function<void(std::size_t step, const ForwardTrace&, const std::vector<double>& y_out,
                           const std::vector<std::vector<double>>& tanh_delta)>;
    void set_signal_sink(SignalSink sink) { sink_ = std::move(sink); }

    TrainReport train(const Dataset& train_set, const Dataset& test_set, std::size_t epochs,
                      Rng& order_rng);

    // Oracle twin with matched weights/eta for lockstep comparisons.
    DenseNet oracle_twin() const;

private:
    NetworkConfig cfg_;
    Calibration cal_;
    std::vector<CrossbarState> cbs_;
    SignalSink sink_;
    std::size_t step_count_ = 0;

    std::vector<double> hidden_to_features(const std::vector<double>& act) const;
};

std::size_t predict_class(const std::vector<double>& o, OutputFn fn);

} // namespace mcbnn
