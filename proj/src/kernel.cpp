#include "qka/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "qka/rng.hpp"

namespace qka {

std::uint64_t query_cost(std::uint64_t k, QueryConvention convention) {
    if (k < 1) throw InvalidArgument("query_cost needs k >= 1");
    switch (convention) {
    case QueryConvention::Pairs: return k * (k - 1) / 2;
    case QueryConvention::Squared: return k * k;
    }
    throw InvalidArgument("unknown query convention");
}

void QueryLedger::record_symmetric(std::string_view phase, std::uint64_t k) {
    std::lock_guard lock(mutex_);
    events_.push_back({std::string(phase), k, k, true});
}

void QueryLedger::record_cross(std::string_view phase, std::uint64_t rows, std::uint64_t cols) {
    std::lock_guard lock(mutex_);
    events_.push_back({std::string(phase), rows, cols, false});
}

namespace {

std::uint64_t event_cost(const QueryLedger::Event& e, QueryConvention convention) {
    if (e.symmetric) return query_cost(e.rows, convention);
    return e.rows * e.cols;
}

} // namespace

std::uint64_t QueryLedger::total(QueryConvention convention) const {
    std::lock_guard lock(mutex_);
    std::uint64_t sum = 0;
    for (const Event& e : events_) sum += event_cost(e, convention);
    return sum;
}

std::uint64_t QueryLedger::total_for_phase(std::string_view phase,
                                           QueryConvention convention) const {
    std::lock_guard lock(mutex_);
    std::uint64_t sum = 0;
    for (const Event& e : events_) {
        if (e.phase == phase) sum += event_cost(e, convention);
    }
    return sum;
}

std::size_t QueryLedger::event_count() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

std::vector<QueryLedger::Event> QueryLedger::events() const {
    std::lock_guard lock(mutex_);
    return events_;
}

double estimate_fidelity_shots(double p, int shots, std::uint64_t seed) {
    if (!(p >= -1e-12 && p <= 1.0 + 1e-12)) {
        throw InvalidArgument("fidelity outside [0, 1]: " + std::to_string(p));
    }
    if (shots < 1) throw InvalidArgument("shots must be >= 1");
    p = std::clamp(p, 0.0, 1.0);
    Rng rng(seed);
    int hits = 0;
    for (int i = 0; i < shots; ++i) {
        if (rng.bernoulli(p)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(shots);
}

namespace {

void check_features(const Matrix& features, std::span<const std::size_t> rows) {
    for (std::size_t r : rows) {
        if (r >= features.rows()) throw InvalidArgument("kernel row index out of range");
        for (double v : features.row(r)) {
            if (!std::isfinite(v)) throw NumericError("non-finite feature value");
        }
    }
}

std::vector<Statevector> prepare_states(const Matrix& features,
                                        std::span<const std::size_t> rows,
                                        const CircuitPlan& plan,
                                        std::span<const double> theta) {
    std::vector<Statevector> states;
    states.reserve(rows.size());
    for (std::size_t r : rows) {
        states.push_back(state_prep(plan, theta, features.row(r)));
    }
    return states;
}

double pair_entry(const Statevector& a, const Statevector& b, std::size_t row_a,
                  std::size_t row_b, const KernelMode& mode) {
    const double p = fidelity(a, b);
    if (mode.exact) return p;
    // Compute-uncompute realization: the all-zeros outcome of the overlap
    // circuit has probability p; one stream per (seed, i, j).
    return estimate_fidelity_shots(std::min(1.0, std::max(0.0, p)), mode.shots,
                                   derive_seed(mode.seed, row_a, row_b));
}

} // namespace

KernelMatrix build_kernel(const Matrix& features, std::span<const std::size_t> rows,
                          const CircuitPlan& plan, std::span<const double> theta,
                          const KernelMode& mode, QueryLedger& ledger,
                          std::string_view phase) {
    if (rows.empty()) throw InvalidArgument("kernel needs at least one row");
    if (!mode.exact && mode.shots < 1) throw InvalidArgument("shots mode needs shots >= 1");
    validate_plan(plan);
    check_features(features, rows);

    const std::size_t k = rows.size();
    KernelMatrix kernel;
    kernel.values = Matrix(k, k, 0.0);
    kernel.indices.assign(rows.begin(), rows.end());
    kernel.theta.assign(theta.begin(), theta.end());
    kernel.exact = mode.exact;
    kernel.shots = mode.exact ? 0 : mode.shots;

    const auto states = prepare_states(features, rows, plan, theta);
    for (std::size_t i = 0; i < k; ++i) {
        kernel.values(i, i) = 1.0;
        for (std::size_t j = i + 1; j < k; ++j) {
            const double v = pair_entry(states[i], states[j], rows[i], rows[j], mode);
            kernel.values(i, j) = v;
            kernel.values(j, i) = v;
        }
    }
    ledger.record_symmetric(phase, k);
    return kernel;
}

Matrix build_cross_kernel(const Matrix& lhs_features, std::span<const std::size_t> lhs_rows,
                          const Matrix& rhs_features, std::span<const std::size_t> rhs_rows,
                          const CircuitPlan& plan, std::span<const double> theta,
                          const KernelMode& mode, QueryLedger& ledger,
                          std::string_view phase) {
    if (lhs_rows.empty() || rhs_rows.empty()) {
        throw InvalidArgument("cross kernel needs rows on both sides");
    }
    if (!mode.exact && mode.shots < 1) throw InvalidArgument("shots mode needs shots >= 1");
    validate_plan(plan);
    check_features(lhs_features, lhs_rows);
    check_features(rhs_features, rhs_rows);

    const auto lhs_states = prepare_states(lhs_features, lhs_rows, plan, theta);
    const auto rhs_states = prepare_states(rhs_features, rhs_rows, plan, theta);

    Matrix values(lhs_rows.size(), rhs_rows.size(), 0.0);
    for (std::size_t i = 0; i < lhs_rows.size(); ++i) {
        for (std::size_t j = 0; j < rhs_rows.size(); ++j) {
            // Cross entries mix the two index spaces; offset one side so the
            // stream cannot collide with a symmetric build on the same seed.
            values(i, j) = pair_entry(lhs_states[i], rhs_states[j], lhs_rows[i] ^ 0x8000000000000000ULL,
                                      rhs_rows[j], mode);
        }
    }
    ledger.record_cross(phase, lhs_rows.size(), rhs_rows.size());
    return values;
}

std::uint64_t theta_hash(std::span<const double> theta) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (double v : theta) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        __builtin_memcpy(&bits, &v, sizeof(bits));
        h = splitmix64(h ^ bits);
    }
    return h;
}

void save_kernel_csv(const KernelMatrix& kernel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");

    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(theta_hash(kernel.theta)));
    out << "# theta_hash=" << buf << "\n";
    out << "index";
    for (std::size_t idx : kernel.indices) out << ',' << idx;
    out << "\n";
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        out << kernel.indices[i];
        for (std::size_t j = 0; j < kernel.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", kernel.values(i, j));
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("failed writing " + path);
}

} // namespace qka
