#pragma once

// Soft-margin SVM dual solver (SMO-style pairwise coordinate ascent). The
// optimal dual objective doubles as the kernel-alignment training loss.

#include <span>
#include <vector>

#include "qka/kernel.hpp"
#include "qka/linalg.hpp"

namespace qka {

struct SvmOptions {
    double c = 1.0;
    double tol = 1e-8;          // max KKT violation at exit
    bool psd_check = true;      // Jacobi min-eigenvalue guard on the kernel
    double psd_floor = -1e-6;   // eigenvalues below this are an error
    // 0 = automatic budget, exhaustion throws; an explicit cap returns the
    // best iterate found (kkt_violation reports the remaining gap).
    std::size_t max_iterations = 0;
};

struct SvmSolution {
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<int> labels;
    double c = 0.0;
    double dual_objective = 0.0;
    std::vector<std::size_t> support_indices;
    double kkt_violation = 0.0;
    std::size_t iterations = 0;
    // NaN when the PSD check was skipped.
    double kernel_min_eigenvalue = 0.0;
};

// Maximizes sum(a) - 1/2 sum a_i a_j y_i y_j K_ij over 0 <= a <= C,
// sum a_i y_i = 0. Deterministic: working pairs are chosen by maximal KKT
// violation with lowest-index tie-breaking.
SvmSolution solve_dual(const Matrix& kernel, std::span<const int> labels,
                       const SvmOptions& options);

// Error floor for the PSD guard of a built kernel. Exact kernels are PSD by
// construction; shot-sampled ones get headroom for binomial spectral noise,
// which shifts eigenvalues by up to about sqrt(k / shots).
double kernel_psd_floor(const KernelMatrix& kernel);

// Throws NumericError when the kernel's minimum eigenvalue sits below its
// floor; returns the minimum eigenvalue otherwise (NaN for exact kernels,
// which are not checked).
double check_kernel_psd(const KernelMatrix& kernel);

// Kernel-matrix overload; applies the provenance-aware PSD guard above
// (exact kernels skip it, shot-sampled ones use the noise-scaled floor).
SvmSolution solve_dual(const KernelMatrix& kernel, std::span<const int> labels,
                       const SvmOptions& options);

// The alignment loss: the dual objective at the optimum. Same code path as
// solve_dual, so the two agree bit for bit.
double alignment_loss(const KernelMatrix& kernel, std::span<const int> labels,
                      const SvmOptions& options);
double alignment_loss(const Matrix& kernel, std::span<const int> labels,
                      const SvmOptions& options);

// score_t = sum_i a_i y_i K(t, i) + bias; columns of kernel_test_train must
// match the training size.
std::vector<double> decision_scores(const SvmSolution& solution,
                                    const Matrix& kernel_test_train);

} // namespace qka
