#include "qka/svm.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace qka {

namespace {

constexpr double kTau = 1e-12;        // curvature floor for degenerate pairs
constexpr double kPsdFloor = -1e-6;   // eigenvalues below this are an error

void check_inputs(const Matrix& kernel, std::span<const int> labels, const SvmOptions& options) {
    const std::size_t n = kernel.rows();
    if (n == 0 || kernel.cols() != n) throw InvalidArgument("kernel must be square");
    if (labels.size() != n) throw InvalidArgument("label count does not match kernel size");
    if (!(options.c > 0.0)) throw InvalidArgument("C must be > 0");
    bool pos = false;
    bool neg = false;
    for (int y : labels) {
        if (y == 1) pos = true;
        else if (y == -1) neg = true;
        else throw InvalidArgument("labels must be +1 or -1");
    }
    if (!pos || !neg) throw InvalidArgument("single-class labels");
    for (std::size_t i = 0; i < n * n; ++i) {
        if (!std::isfinite(kernel.data()[i])) throw NumericError("non-finite kernel entry");
    }
}

} // namespace

SvmSolution solve_dual(const Matrix& kernel, std::span<const int> original_labels,
                       const SvmOptions& options) {
    check_inputs(kernel, original_labels, options);
    const std::size_t n = kernel.rows();
    const double c = options.c;

    // Canonical label sign: the dual is invariant under a global flip and the
    // bias just changes sign, so solving the canonical problem makes the
    // label-flip symmetry exact rather than tolerance-deep.
    const bool flipped = original_labels[0] == -1;
    std::vector<int> canonical(original_labels.begin(), original_labels.end());
    if (flipped) {
        for (int& y : canonical) y = -y;
    }
    std::span<const int> labels(canonical);

    SvmSolution sol;
    sol.labels.assign(original_labels.begin(), original_labels.end());
    sol.c = c;
    sol.kernel_min_eigenvalue = std::numeric_limits<double>::quiet_NaN();

    if (options.psd_check) {
        const double lambda_min = min_symmetric_eigenvalue(kernel);
        sol.kernel_min_eigenvalue = lambda_min;
        if (lambda_min < options.psd_floor) {
            throw NumericError("kernel is not positive semidefinite (min eigenvalue " +
                               std::to_string(lambda_min) + ", floor " +
                               std::to_string(options.psd_floor) + ")");
        }
        // Eigenvalues in [floor, 0) are treated as zero: the pairwise
        // curvature floor below absorbs them.
    }

    // Minimize f(a) = 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij over the box and
    // the equality constraint. grad_i = (Qa)_i - 1.
    auto q = [&](std::size_t i, std::size_t j) {
        return static_cast<double>(labels[i] * labels[j]) * kernel(i, j);
    };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    const std::size_t max_iterations =
        options.max_iterations > 0 ? options.max_iterations : 100'000 + 2'000 * n;
    const double tol = options.tol;

    std::size_t iter = 0;
    double gap = std::numeric_limits<double>::infinity();
    for (; iter < max_iterations; ++iter) {
        // First index: maximal KKT violation, lowest index on ties. Second
        // index: largest guaranteed objective decrease among violating
        // partners (the usual second-order rule; plain max-violation pairing
        // can stall in floating point on rank-deficient kernels), again lowest
        // index on ties.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(labels[t]) * grad[t];
            const bool in_up = (labels[t] == 1) ? (alpha[t] < c) : (alpha[t] > 0.0);
            const bool in_low = (labels[t] == 1) ? (alpha[t] > 0.0) : (alpha[t] < c);
            if (in_up && v > up_best) {
                up_best = v;
                i = t;
            }
            if (in_low && v < low_best) low_best = v;
        }
        gap = up_best - low_best;
        if (i == n || !std::isfinite(low_best) || gap < tol) break;

        std::size_t j = n;
        double gain_best = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const bool in_low = (labels[t] == 1) ? (alpha[t] > 0.0) : (alpha[t] < c);
            if (!in_low) continue;
            const double v = -static_cast<double>(labels[t]) * grad[t];
            const double b = up_best - v;
            if (b <= 0.0) continue;
            double a = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
            if (a <= 0.0) a = kTau;
            const double gain = b * b / a;
            if (gain > gain_best) {
                gain_best = gain;
                j = t;
            }
        }
        if (j == n) break;

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];

        if (labels[i] != labels[j]) {
            double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            }
        } else {
            double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if (alpha[i] < 0.0) {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += q(t, i) * dai + q(t, j) * daj;
        }
    }

    // An explicit iteration cap means best-effort termination; only the
    // automatic budget treats exhaustion as failure.
    if (options.max_iterations == 0 && iter >= max_iterations && gap >= tol) {
        throw NumericError("SMO did not converge within " + std::to_string(max_iterations) +
                           " iterations (gap " + std::to_string(gap) + ")");
    }

    sol.alphas = alpha;
    sol.iterations = iter;
    sol.kkt_violation = std::max(gap, 0.0);

    // Objective via the gradient identity (Qa)_i = grad_i + 1.
    double objective = 0.0;
    for (std::size_t t = 0; t < n; ++t) objective += alpha[t] * (1.0 - grad[t]);
    sol.dual_objective = 0.5 * objective;

    // Bias: mean of -y_t grad_t over free support vectors; midpoint of the
    // feasible interval when every support vector sits on a bound.
    const double bound_eps = 1e-10 * c;
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double up_best = -std::numeric_limits<double>::infinity();
    double low_best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -static_cast<double>(labels[t]) * grad[t];
        if (alpha[t] > bound_eps && alpha[t] < c - bound_eps) {
            free_sum += v;
            ++free_count;
        }
        const bool in_up = (labels[t] == 1) ? (alpha[t] < c) : (alpha[t] > 0.0);
        const bool in_low = (labels[t] == 1) ? (alpha[t] > 0.0) : (alpha[t] < c);
        if (in_up) up_best = std::max(up_best, v);
        if (in_low) low_best = std::min(low_best, v);
    }
    if (free_count > 0) {
        sol.bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(up_best) && std::isfinite(low_best)) {
        sol.bias = 0.5 * (up_best + low_best);
    } else {
        sol.bias = 0.0;
    }
    if (flipped) sol.bias = -sol.bias;

    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > bound_eps) sol.support_indices.push_back(t);
    }
    return sol;
}

double kernel_psd_floor(const KernelMatrix& kernel) {
    if (kernel.exact || kernel.shots < 1) return kPsdFloor;
    const double noise_scale =
        std::sqrt(static_cast<double>(kernel.size()) / static_cast<double>(kernel.shots));
    return -(1e-6 + 2.0 * noise_scale);
}

double check_kernel_psd(const KernelMatrix& kernel) {
    if (kernel.exact) return std::numeric_limits<double>::quiet_NaN();
    const double lambda_min = min_symmetric_eigenvalue(kernel.values);
    const double floor = kernel_psd_floor(kernel);
    if (lambda_min < floor) {
        throw NumericError("shot-sampled kernel is not positive semidefinite beyond the "
                           "noise floor (min eigenvalue " +
                           std::to_string(lambda_min) + ", floor " + std::to_string(floor) + ")");
    }
    return lambda_min;
}

SvmSolution solve_dual(const KernelMatrix& kernel, std::span<const int> labels,
                       const SvmOptions& options) {
    SvmOptions opts = options;
    opts.psd_check = false;
    const double lambda_min = check_kernel_psd(kernel);
    auto sol = solve_dual(kernel.values, labels, opts);
    sol.kernel_min_eigenvalue = lambda_min;
    return sol;
}

double alignment_loss(const KernelMatrix& kernel, std::span<const int> labels,
                      const SvmOptions& options) {
    return solve_dual(kernel, labels, options).dual_objective;
}

double alignment_loss(const Matrix& kernel, std::span<const int> labels,
                      const SvmOptions& options) {
    return solve_dual(kernel, labels, options).dual_objective;
}

std::vector<double> decision_scores(const SvmSolution& solution,
                                    const Matrix& kernel_test_train) {
    const std::size_t n_train = solution.alphas.size();
    if (kernel_test_train.cols() != n_train) {
        throw InvalidArgument("cross-kernel columns do not match training size");
    }
    std::vector<double> scores(kernel_test_train.rows(), 0.0);
    for (std::size_t t = 0; t < kernel_test_train.rows(); ++t) {
        double s = solution.bias;
        for (std::size_t i = 0; i < n_train; ++i) {
            s += solution.alphas[i] * static_cast<double>(solution.labels[i]) *
                 kernel_test_train(t, i);
        }
        scores[t] = s;
    }
    return scores;
}

} // namespace qka
