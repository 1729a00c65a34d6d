#pragma once

#include "mcbnn/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mcbnn {

enum class Activation { sigmoid, tanh };
enum class OutputFn { softmax, sigmoid };

// Ideal floating-point reference network. Weight matrices are stored as
// (inputs+1) x outputs with row 0 holding the bias weights, mirroring the
// crossbar layout.
struct DenseNet {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    Activation hidden_act = Activation::sigmoid;
    OutputFn output_fn = OutputFn::softmax;
    double eta = 0.1;
    double bias_input = 0.24;
    bool tanh_rescale = true; // apply tanh to the backpropagated delta
    // weight clipping, mirrored from the analog path when lockstep-comparing
    std::optional<std::pair<double, double>> weight_clip;

    void validate() const;
};

DenseNet make_dense(const std::vector<std::size_t>& sizes, double eta, Activation act,
                    OutputFn out, Rng& rng, double w_lo = -0.1, double w_hi = 0.1);

struct OracleTrace {
    std::vector<std::vector<double>> pre;  // r per layer
    std::vector<std::vector<double>> act;  // layer inputs: x, then activations
    std::vector<double> output;
};

OracleTrace oracle_forward(const DenseNet& net, std::span<const double> x);

// Per-layer weight updates eta * y^(k) (input^(k))^T, with the error chain
// y^(k-1) = [tanh](delta^(k)) .* act'(r^(k-1)). exact_gradient switches the
// chain to the true derivative path for finite-difference checks.
std::vector<Matrix> oracle_backprop(const DenseNet& net, std::span<const double> x,
                                    std::span<const double> d, bool exact_gradient = false);

void apply_updates(DenseNet& net, const std::vector<Matrix>& dw);
void oracle_train_step(DenseNet& net, std::span<const double> x, std::span<const double> d);

double oracle_loss(const DenseNet& net, std::span<const double> o, std::span<const double> d);

// max relative error between analytic and central-difference gradients
double grad_check(const DenseNet& net, std::span<const double> x, std::span<const double> d,
                  double eps);

} // namespace mcbnn
