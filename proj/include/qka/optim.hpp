#pragma once

// Loss-only optimizers: SPSA, ADAM on central-difference gradients, and plain
// gradient descent on central differences. Every loss evaluation is counted so
// query accounting downstream stays exact.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qka {

enum class OptimizerKind { Spsa, Adam, Gd };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Spsa;
    std::size_t max_iterations = 200;
    double learning_rate = 0.01;
    double perturbation = 0.05; // SPSA
    double tolerance = 1e-6;    // ADAM/GD early stop on parameter movement
    double fd_step = 0.01;      // central-difference step for ADAM/GD
    std::uint64_t seed = 0;

    static OptimizerConfig spsa_defaults();
    static OptimizerConfig adam_defaults();
    static OptimizerConfig gd_defaults();
};

struct StepReport {
    std::vector<double> theta_after;
    std::size_t loss_evals_used = 0;
    double loss_value = 0.0;
};

using LossFn = std::function<double(std::span<const double>)>;

// One SPSA update: Rademacher direction from the (seed, iteration) stream,
// g = [L(t+c*d) - L(t-c*d)] / (2c) elementwise divided by d; exactly two loss
// evaluations. loss_value is the mean of the two.
StepReport spsa_step(std::span<const double> theta, const LossFn& loss,
                     const OptimizerConfig& config, std::size_t iteration);

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step = 0;

    explicit AdamState(std::size_t dim)
        : first_moment(dim, 0.0), second_moment(dim, 0.0) {}
};

// Bias-corrected ADAM update (beta1=0.9, beta2=0.999, eps=1e-8) from an
// externally computed gradient. loss_evals_used reports the 2*dim central
// differences that produced the gradient; loss_value is filled by the caller.
StepReport adam_step(std::span<const double> theta, std::span<const double> grad,
                     AdamState& state, const OptimizerConfig& config);

// Central differences per coordinate; 2*dim loss evaluations.
std::vector<double> finite_diff_grad(std::span<const double> theta, const LossFn& loss,
                                     double step_size);

struct OptimizerRun {
    std::vector<StepReport> steps;
    std::size_t best_step = 0; // argmin of recorded loss, earliest on ties
    std::vector<double> theta_best;
    double best_loss = 0.0;
    std::size_t total_loss_evals = 0;
};

// Runs to max_iterations (SPSA) or until the parameter update drops below
// tolerance (ADAM/GD). The result is the iterate with the lowest recorded
// loss, not necessarily the last one.
OptimizerRun run_optimizer(std::span<const double> theta0, const LossFn& loss,
                           const OptimizerConfig& config);

} // namespace qka
