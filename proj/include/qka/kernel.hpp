#pragma once

// Fidelity kernel assembly plus the query ledger that accounts for every
// fidelity-circuit execution.

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qka/circuits.hpp"
#include "qka/linalg.hpp"

namespace qka {

enum class QueryConvention { Pairs, Squared };

// pairs -> k(k-1)/2 (unit diagonal and symmetry exploited), squared -> k^2.
std::uint64_t query_cost(std::uint64_t k, QueryConvention convention);

struct KernelMode {
    bool exact = true;
    int shots = 0;
    std::uint64_t seed = 0;

    static KernelMode Exact() { return {true, 0, 0}; }
    static KernelMode Shots(int shots, std::uint64_t seed) { return {false, shots, seed}; }
};

// Append-only log of kernel-evaluation events. Totals are derived per query
// convention so both accountings stay available. Thread safe; the total only
// ever grows.
class QueryLedger {
public:
    struct Event {
        std::string phase;
        std::uint64_t rows = 0;
        std::uint64_t cols = 0;
        bool symmetric = true;
    };

    void record_symmetric(std::string_view phase, std::uint64_t k);
    void record_cross(std::string_view phase, std::uint64_t rows, std::uint64_t cols);

    std::uint64_t total(QueryConvention convention) const;
    std::uint64_t total_for_phase(std::string_view phase, QueryConvention convention) const;
    std::size_t event_count() const;
    std::vector<Event> events() const;

private:
    mutable std::mutex mutex_;
    std::vector<Event> events_;
};

struct KernelMatrix {
    Matrix values;                    // symmetric, unit diagonal
    std::vector<std::size_t> indices; // dataset rows this kernel was built on
    std::vector<double> theta;        // parameter snapshot
    bool exact = true;
    int shots = 0;                    // 0 in exact mode

    std::size_t size() const { return values.rows(); }
};

// Gram matrix over the selected rows. Off-diagonals are |<psi_i|psi_j>|^2 in
// exact mode or the all-zeros frequency of `shots` Bernoulli draws in shots
// mode (per-pair streams derived from (seed, row_i, row_j)); computed once and
// mirrored. The ledger gains one symmetric event of size k.
KernelMatrix build_kernel(const Matrix& features, std::span<const std::size_t> rows,
                          const CircuitPlan& plan, std::span<const double> theta,
                          const KernelMode& mode, QueryLedger& ledger,
                          std::string_view phase = "kernel");

// Rectangular kernel (e.g. test rows vs training rows); rows*cols evaluations.
Matrix build_cross_kernel(const Matrix& lhs_features, std::span<const std::size_t> lhs_rows,
                          const Matrix& rhs_features, std::span<const std::size_t> rhs_rows,
                          const CircuitPlan& plan, std::span<const double> theta,
                          const KernelMode& mode, QueryLedger& ledger,
                          std::string_view phase = "score");

// Binomial(shots, p)/shots - the unbiased finite-shot estimate of a fidelity.
double estimate_fidelity_shots(double p, int shots, std::uint64_t seed);

std::uint64_t theta_hash(std::span<const double> theta);

// CSV layout: "# theta_hash=<hex>" comment, then a header row with the dataset
// indices, then one row per kernel row ("index,v,...").
void save_kernel_csv(const KernelMatrix& kernel, const std::string& path);

} // namespace qka
