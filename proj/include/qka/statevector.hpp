#pragma once

// Dense statevector simulation of few-qubit circuits.
//
// Qubit ordering is little-endian throughout the project: qubit 0 is the
// least significant bit of the amplitude index, so basis state |q_{n-1} ... q_1 q_0>
// lives at index sum_j q_j * 2^j.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qka/errors.hpp"

namespace qka {

using cdouble = std::complex<double>;

struct Gate {
    enum class Kind { H, X, RY, RZ, CX, PhaseDiag };

    Kind kind = Kind::H;
    int qubit = -1;   // target qubit (H, X, RY, RZ, CX)
    int control = -1; // CX only
    double angle = 0.0;
    std::vector<double> phases; // PhaseDiag: one angle per basis state

    static Gate h(int qubit) { return {Kind::H, qubit, -1, 0.0, {}}; }
    static Gate x(int qubit) { return {Kind::X, qubit, -1, 0.0, {}}; }
    static Gate ry(int qubit, double angle) { return {Kind::RY, qubit, -1, angle, {}}; }
    static Gate rz(int qubit, double angle) { return {Kind::RZ, qubit, -1, angle, {}}; }
    static Gate cx(int control, int target) { return {Kind::CX, target, control, 0.0, {}}; }
    static Gate phase_diag(std::vector<double> phases) {
        return {Kind::PhaseDiag, -1, -1, 0.0, std::move(phases)};
    }

    // The gate applying the inverse unitary.
    Gate inverse() const;
};

class Statevector {
public:
    // |0...0> on n qubits.
    explicit Statevector(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const cdouble> amplitudes() const { return amps_; }
    const cdouble& amp(std::size_t basis) const { return amps_[basis]; }

    double norm_squared() const;

    // In-place gate application; the value-returning free function below is
    // the immutable-facing variant.
    void apply(const Gate& g);

private:
    int n_qubits_;
    std::vector<cdouble> amps_;
};

Statevector apply_gate(Statevector state, const Gate& g);

std::complex<double> inner_product(const Statevector& a, const Statevector& b);

// |<a|b>|^2, symmetric, in [0, 1] up to rounding.
double fidelity(const Statevector& a, const Statevector& b);

} // namespace qka
