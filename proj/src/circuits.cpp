#include "qka/circuits.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qka {

namespace {

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw InvalidArgument(std::string("non-finite ") + what);
    }
}

// Z eigenvalue of qubit q in basis state b: +1 for bit 0, -1 for bit 1.
inline double z_sign(std::size_t basis, int qubit) {
    return (basis >> qubit) & 1 ? -1.0 : 1.0;
}

// Phase vector of exp(i [sum_j first[j] Z_j + sum_{j<j'} second[j][j'] Z_j Z_j']).
std::vector<double> diagonal_phases(int n_qubits, std::span<const double> first,
                                    const std::vector<std::vector<double>>& second) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    std::vector<double> phases(dim, 0.0);
    for (std::size_t b = 0; b < dim; ++b) {
        double phi = 0.0;
        for (int j = 0; j < n_qubits; ++j) {
            const double zj = z_sign(b, j);
            phi += first[j] * zj;
            for (int j2 = j + 1; j2 < n_qubits; ++j2) {
                phi += second[j][j2] * zj * z_sign(b, j2);
            }
        }
        phases[b] = phi;
    }
    return phases;
}

void append_hadamard_layer(ParamCircuit& circuit) {
    for (int q = 0; q < circuit.n_qubits; ++q) circuit.gates.push_back(Gate::h(q));
}

void append_entanglement_layer(ParamCircuit& circuit, Entanglement entanglement) {
    const int n = circuit.n_qubits;
    if (entanglement == Entanglement::Linear) {
        for (int q = 0; q + 1 < n; ++q) circuit.gates.push_back(Gate::cx(q, q + 1));
    } else {
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b) circuit.gates.push_back(Gate::cx(a, b));
        }
    }
}

} // namespace

std::size_t parameter_count(const AnsatzSpec& spec) {
    const std::size_t layers = static_cast<std::size_t>(spec.reps) + 1;
    const std::size_t n = static_cast<std::size_t>(spec.n_qubits);
    switch (spec.kind) {
    case AnsatzKind::RealAmplitudes: return n * layers;
    case AnsatzKind::HardwareEfficientSu2: return 2 * n * layers;
    }
    throw InvalidArgument("unknown ansatz kind");
}

ParamCircuit build_zz_feature_map(const FeatureMapSpec& spec, std::span<const double> x) {
    if (spec.kind != FeatureMapKind::ZZ2ndOrder) {
        throw InvalidArgument("build_zz_feature_map called with a non-ZZ spec");
    }
    if (static_cast<int>(x.size()) != spec.n_qubits) {
        throw InvalidArgument("feature dimension " + std::to_string(x.size()) +
                              " does not match " + std::to_string(spec.n_qubits) + " qubits");
    }
    if (spec.reps < 1) throw InvalidArgument("feature map reps must be >= 1");
    check_finite(x, "feature value");

    const int n = spec.n_qubits;
    std::vector<double> first(x.begin(), x.end());
    std::vector<std::vector<double>> second(n, std::vector<double>(n, 0.0));
    constexpr double pi = std::numbers::pi;
    for (int j = 0; j < n; ++j) {
        for (int j2 = j + 1; j2 < n; ++j2) {
            second[j][j2] = (pi - x[j]) * (pi - x[j2]);
        }
    }

    ParamCircuit circuit;
    circuit.n_qubits = n;
    auto phases = diagonal_phases(n, first, second);
    for (int rep = 0; rep < spec.reps; ++rep) {
        append_hadamard_layer(circuit);
        circuit.gates.push_back(Gate::phase_diag(phases));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        circuit.free_params.push_back("x[" + std::to_string(j) + "]");
    }
    return circuit;
}

ParamCircuit build_iqp_feature_map(const FeatureMapSpec& spec, std::span<const double> x) {
    if (spec.kind != FeatureMapKind::Iqp) {
        throw InvalidArgument("build_iqp_feature_map called with a non-IQP spec");
    }
    if (static_cast<int>(x.size()) != spec.n_qubits) {
        throw InvalidArgument("feature dimension " + std::to_string(x.size()) +
                              " does not match " + std::to_string(spec.n_qubits) + " qubits");
    }
    if (spec.reps < 1) throw InvalidArgument("feature map reps must be >= 1");
    const double c = spec.effective_bandwidth();
    if (!(c > 0.0)) throw InvalidArgument("IQP bandwidth must be > 0");
    check_finite(x, "feature value");

    const int n = spec.n_qubits;
    std::vector<double> first(n, 0.0);
    std::vector<std::vector<double>> second(n, std::vector<double>(n, 0.0));
    for (int j = 0; j < n; ++j) {
        first[j] = c * x[j];
        for (int j2 = j + 1; j2 < n; ++j2) {
            second[j][j2] = c * c * x[j] * x[j2];
        }
    }

    ParamCircuit circuit;
    circuit.n_qubits = n;
    auto phases = diagonal_phases(n, first, second);
    for (int rep = 0; rep < spec.reps; ++rep) {
        append_hadamard_layer(circuit);
        circuit.gates.push_back(Gate::phase_diag(phases));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        circuit.free_params.push_back("x[" + std::to_string(j) + "]");
    }
    return circuit;
}

ParamCircuit build_feature_map(const FeatureMapSpec& spec, std::span<const double> x) {
    switch (spec.kind) {
    case FeatureMapKind::ZZ2ndOrder: return build_zz_feature_map(spec, x);
    case FeatureMapKind::Iqp: return build_iqp_feature_map(spec, x);
    }
    throw InvalidArgument("unknown feature map kind");
}

ParamCircuit build_ansatz(const AnsatzSpec& spec, std::span<const double> theta) {
    const std::size_t expected = parameter_count(spec);
    if (theta.size() != expected) {
        throw InvalidArgument("ansatz expects " + std::to_string(expected) +
                              " parameters, got " + std::to_string(theta.size()));
    }
    if (spec.reps < 1) throw InvalidArgument("ansatz reps must be >= 1");
    check_finite(theta, "ansatz parameter");

    ParamCircuit circuit;
    circuit.n_qubits = spec.n_qubits;
    const int n = spec.n_qubits;
    std::size_t next = 0;

    auto rotation_layer = [&] {
        for (int q = 0; q < n; ++q) {
            circuit.gates.push_back(Gate::ry(q, theta[next]));
            circuit.free_params.push_back("theta[" + std::to_string(next) + "]");
            ++next;
        }
        if (spec.kind == AnsatzKind::HardwareEfficientSu2) {
            for (int q = 0; q < n; ++q) {
                circuit.gates.push_back(Gate::rz(q, theta[next]));
                circuit.free_params.push_back("theta[" + std::to_string(next) + "]");
                ++next;
            }
        }
    };

    rotation_layer();
    for (int rep = 0; rep < spec.reps; ++rep) {
        append_entanglement_layer(circuit, spec.entanglement);
        rotation_layer();
    }
    return circuit;
}

Statevector run_circuit(const ParamCircuit& circuit) {
    Statevector state(circuit.n_qubits);
    run_circuit_on(state, circuit);
    return state;
}

void run_circuit_on(Statevector& state, const ParamCircuit& circuit) {
    if (state.n_qubits() != circuit.n_qubits) {
        throw InvalidArgument("circuit qubit count does not match state");
    }
    for (const Gate& g : circuit.gates) state.apply(g);
}

void validate_plan(const CircuitPlan& plan) {
    if (plan.ansatz.n_qubits != plan.feature_map.n_qubits) {
        throw InvalidArgument("ansatz and feature map disagree on qubit count");
    }
}

Statevector state_prep(const AnsatzSpec& ansatz, const FeatureMapSpec& fmap,
                       std::span<const double> theta, std::span<const double> x) {
    if (ansatz.n_qubits != fmap.n_qubits) {
        throw InvalidArgument("ansatz and feature map disagree on qubit count");
    }
    Statevector state(ansatz.n_qubits);
    run_circuit_on(state, build_ansatz(ansatz, theta));
    run_circuit_on(state, build_feature_map(fmap, x));
    return state;
}

Statevector state_prep(const CircuitPlan& plan, std::span<const double> theta,
                       std::span<const double> x) {
    return state_prep(plan.ansatz, plan.feature_map, theta, x);
}

} // namespace qka
