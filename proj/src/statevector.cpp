#include "qka/statevector.hpp"

#include <cmath>

namespace qka {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

void check_qubit(int qubit, int n_qubits) {
    if (qubit < 0 || qubit >= n_qubits) {
        throw InvalidArgument("qubit index " + std::to_string(qubit) +
                              " out of range for " + std::to_string(n_qubits) + " qubits");
    }
}

} // namespace

Gate Gate::inverse() const {
    Gate inv = *this;
    switch (kind) {
    case Kind::H:
    case Kind::X:
    case Kind::CX:
        break; // self-inverse
    case Kind::RY:
    case Kind::RZ:
        inv.angle = -angle;
        break;
    case Kind::PhaseDiag:
        for (double& p : inv.phases) p = -p;
        break;
    }
    return inv;
}

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 16) {
        throw InvalidArgument("n_qubits must be in [1, 16], got " + std::to_string(n_qubits));
    }
    amps_.assign(std::size_t{1} << n_qubits, cdouble{0.0, 0.0});
    amps_[0] = cdouble{1.0, 0.0};
}

double Statevector::norm_squared() const {
    double total = 0.0;
    for (const cdouble& a : amps_) total += std::norm(a);
    return total;
}

void Statevector::apply(const Gate& g) {
    const std::size_t dim = amps_.size();
    switch (g.kind) {
    case Gate::Kind::H: {
        check_qubit(g.qubit, n_qubits_);
        const std::size_t mask = std::size_t{1} << g.qubit;
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & mask) continue;
            const cdouble a = amps_[i];
            const cdouble b = amps_[i | mask];
            amps_[i] = kInvSqrt2 * (a + b);
            amps_[i | mask] = kInvSqrt2 * (a - b);
        }
        break;
    }
    case Gate::Kind::X: {
        check_qubit(g.qubit, n_qubits_);
        const std::size_t mask = std::size_t{1} << g.qubit;
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & mask) continue;
            std::swap(amps_[i], amps_[i | mask]);
        }
        break;
    }
    case Gate::Kind::RY: {
        check_qubit(g.qubit, n_qubits_);
        if (!std::isfinite(g.angle)) throw InvalidArgument("non-finite RY angle");
        const double c = std::cos(g.angle / 2.0);
        const double s = std::sin(g.angle / 2.0);
        const std::size_t mask = std::size_t{1} << g.qubit;
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & mask) continue;
            const cdouble a = amps_[i];
            const cdouble b = amps_[i | mask];
            amps_[i] = c * a - s * b;
            amps_[i | mask] = s * a + c * b;
        }
        break;
    }
    case Gate::Kind::RZ: {
        check_qubit(g.qubit, n_qubits_);
        if (!std::isfinite(g.angle)) throw InvalidArgument("non-finite RZ angle");
        const cdouble e0 = std::polar(1.0, -g.angle / 2.0);
        const cdouble e1 = std::polar(1.0, g.angle / 2.0);
        const std::size_t mask = std::size_t{1} << g.qubit;
        for (std::size_t i = 0; i < dim; ++i) {
            amps_[i] *= (i & mask) ? e1 : e0;
        }
        break;
    }
    case Gate::Kind::CX: {
        check_qubit(g.qubit, n_qubits_);
        check_qubit(g.control, n_qubits_);
        if (g.control == g.qubit) throw InvalidArgument("CX control equals target");
        const std::size_t cmask = std::size_t{1} << g.control;
        const std::size_t tmask = std::size_t{1} << g.qubit;
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & cmask) && !(i & tmask)) {
                std::swap(amps_[i], amps_[i | tmask]);
            }
        }
        break;
    }
    case Gate::Kind::PhaseDiag: {
        if (g.phases.size() != dim) {
            throw InvalidArgument("PhaseDiag length " + std::to_string(g.phases.size()) +
                                  " does not match dimension " + std::to_string(dim));
        }
        for (std::size_t i = 0; i < dim; ++i) {
            if (!std::isfinite(g.phases[i])) throw InvalidArgument("non-finite phase");
            amps_[i] *= std::polar(1.0, g.phases[i]);
        }
        break;
    }
    }
}

Statevector apply_gate(Statevector state, const Gate& g) {
    state.apply(g);
    return state;
}

std::complex<double> inner_product(const Statevector& a, const Statevector& b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw InvalidArgument("inner product between states of different qubit counts");
    }
    cdouble acc{0.0, 0.0};
    const auto aa = a.amplitudes();
    const auto bb = b.amplitudes();
    for (std::size_t i = 0; i < aa.size(); ++i) {
        acc += std::conj(aa[i]) * bb[i];
    }
    return acc;
}

double fidelity(const Statevector& a, const Statevector& b) {
    return std::norm(inner_product(a, b));
}

} // namespace qka
