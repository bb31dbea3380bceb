#include "qka/optim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "qka/errors.hpp"
#include "qka/rng.hpp"

namespace qka {

OptimizerConfig OptimizerConfig::spsa_defaults() {
    OptimizerConfig c;
    c.kind = OptimizerKind::Spsa;
    c.max_iterations = 200;
    c.learning_rate = 0.01;
    c.perturbation = 0.05;
    return c;
}

OptimizerConfig OptimizerConfig::adam_defaults() {
    OptimizerConfig c;
    c.kind = OptimizerKind::Adam;
    c.max_iterations = 200;
    c.learning_rate = 0.01;
    c.tolerance = 1e-6;
    return c;
}

OptimizerConfig OptimizerConfig::gd_defaults() {
    OptimizerConfig c;
    c.kind = OptimizerKind::Gd;
    c.max_iterations = 200;
    c.learning_rate = 0.01;
    c.tolerance = 1e-7;
    return c;
}

namespace {

double checked(double loss) {
    if (!std::isfinite(loss)) throw NumericError("loss evaluated to a non-finite value");
    return loss;
}

void validate(const OptimizerConfig& config) {
    if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
    if (config.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (config.kind == OptimizerKind::Spsa && !(config.perturbation > 0.0)) {
        throw InvalidArgument("SPSA perturbation must be > 0");
    }
    if (config.kind != OptimizerKind::Spsa && !(config.fd_step > 0.0)) {
        throw InvalidArgument("fd_step must be > 0");
    }
}

} // namespace

StepReport spsa_step(std::span<const double> theta, const LossFn& loss,
                     const OptimizerConfig& config, std::size_t iteration) {
    validate(config);
    const std::size_t dim = theta.size();
    Rng rng(derive_seed(config.seed, fnv1a("spsa"), iteration));

    std::vector<int> direction(dim);
    for (auto& d : direction) d = rng.rademacher();

    const double c = config.perturbation;
    std::vector<double> plus(theta.begin(), theta.end());
    std::vector<double> minus(theta.begin(), theta.end());
    for (std::size_t i = 0; i < dim; ++i) {
        plus[i] += c * direction[i];
        minus[i] -= c * direction[i];
    }
    const double loss_plus = checked(loss(plus));
    const double loss_minus = checked(loss(minus));
    const double slope = (loss_plus - loss_minus) / (2.0 * c);

    StepReport report;
    report.theta_after.assign(theta.begin(), theta.end());
    for (std::size_t i = 0; i < dim; ++i) {
        // Rademacher entries are their own inverse.
        report.theta_after[i] -= config.learning_rate * slope * direction[i];
    }
    report.loss_evals_used = 2;
    report.loss_value = 0.5 * (loss_plus + loss_minus);
    return report;
}

StepReport adam_step(std::span<const double> theta, std::span<const double> grad,
                     AdamState& state, const OptimizerConfig& config) {
    validate(config);
    if (grad.size() != theta.size() || state.first_moment.size() != theta.size()) {
        throw InvalidArgument("gradient/state dimension mismatch");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) throw NumericError("non-finite gradient");
    }

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;

    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    StepReport report;
    report.theta_after.assign(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        m = beta1 * m + (1.0 - beta1) * grad[i];
        v = beta2 * v + (1.0 - beta2) * grad[i] * grad[i];
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        report.theta_after[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + eps);
    }
    // Accounts for the central-difference gradient the caller supplied.
    report.loss_evals_used = 2 * theta.size();
    report.loss_value = std::numeric_limits<double>::quiet_NaN();
    return report;
}

std::vector<double> finite_diff_grad(std::span<const double> theta, const LossFn& loss,
                                     double step_size) {
    if (!(step_size > 0.0)) throw InvalidArgument("step_size must be > 0");
    std::vector<double> grad(theta.size(), 0.0);
    std::vector<double> probe(theta.begin(), theta.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double original = probe[i];
        probe[i] = original + step_size;
        const double plus = checked(loss(probe));
        probe[i] = original - step_size;
        const double minus = checked(loss(probe));
        probe[i] = original;
        grad[i] = (plus - minus) / (2.0 * step_size);
    }
    return grad;
}

OptimizerRun run_optimizer(std::span<const double> theta0, const LossFn& loss,
                           const OptimizerConfig& config) {
    validate(config);
    const std::size_t dim = theta0.size();
    if (dim == 0) throw InvalidArgument("empty parameter vector");

    OptimizerRun run;
    std::vector<double> theta(theta0.begin(), theta0.end());
    AdamState adam(dim);

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        StepReport report;
        if (config.kind == OptimizerKind::Spsa) {
            report = spsa_step(theta, loss, config, iter);
        } else {
            // Mean of the probe evaluations doubles as the recorded loss.
            double eval_sum = 0.0;
            std::size_t eval_count = 0;
            LossFn counted = [&](std::span<const double> t) {
                const double v = loss(t);
                eval_sum += v;
                ++eval_count;
                return v;
            };
            const auto grad = finite_diff_grad(theta, counted, config.fd_step);
            if (config.kind == OptimizerKind::Adam) {
                report = adam_step(theta, grad, adam, config);
            } else {
                report.theta_after = theta;
                for (std::size_t i = 0; i < dim; ++i) {
                    report.theta_after[i] -= config.learning_rate * grad[i];
                }
                report.loss_evals_used = 2 * dim;
            }
            report.loss_value = eval_sum / static_cast<double>(eval_count);
        }

        double movement = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double d = report.theta_after[i] - theta[i];
            movement += d * d;
        }
        movement = std::sqrt(movement);

        theta = report.theta_after;
        run.total_loss_evals += report.loss_evals_used;
        run.steps.push_back(std::move(report));

        if (config.kind != OptimizerKind::Spsa && movement < config.tolerance) break;
    }

    run.best_step = 0;
    run.best_loss = run.steps.front().loss_value;
    for (std::size_t i = 1; i < run.steps.size(); ++i) {
        if (run.steps[i].loss_value < run.best_loss) {
            run.best_loss = run.steps[i].loss_value;
            run.best_step = i;
        }
    }
    run.theta_best = run.steps[run.best_step].theta_after;
    return run;
}

} // namespace qka
