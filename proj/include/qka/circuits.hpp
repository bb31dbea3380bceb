#pragma once

// Parameterized state-preparation circuits: a trainable ansatz U(theta)
// followed by a data feature map U_phi(x), prepared as U_phi(x) U(theta) |0...0>.

#include <span>
#include <string>
#include <vector>

#include "qka/statevector.hpp"

namespace qka {

enum class FeatureMapKind { ZZ2ndOrder, Iqp };
enum class AnsatzKind { RealAmplitudes, HardwareEfficientSu2 };
enum class Entanglement { Linear, Full };

struct FeatureMapSpec {
    FeatureMapKind kind = FeatureMapKind::ZZ2ndOrder;
    int n_qubits = 2;
    int reps = 2;
    // IQP bandwidth c; 0 selects the default 2/n, negative values are invalid.
    double bandwidth = 0.0;

    double effective_bandwidth() const {
        return bandwidth == 0.0 ? 2.0 / static_cast<double>(n_qubits) : bandwidth;
    }
};

struct AnsatzSpec {
    AnsatzKind kind = AnsatzKind::HardwareEfficientSu2;
    int n_qubits = 2;
    int reps = 1;
    Entanglement entanglement = Entanglement::Linear;
};

std::size_t parameter_count(const AnsatzSpec& spec);

// A fully bound gate sequence. free_params names the parameter slots that were
// bound while building, in binding order.
struct ParamCircuit {
    int n_qubits = 0;
    std::vector<Gate> gates;
    std::vector<std::string> free_params;
};

// Per rep: H on every qubit, then one diagonal phase layer with first-order
// coefficients x_i and second-order coefficients (pi - x_i)(pi - x_j).
ParamCircuit build_zz_feature_map(const FeatureMapSpec& spec, std::span<const double> x);

// U_Z(x) H^n U_Z(x) H^n with U_Z = exp(i [c sum_j x_j Z_j + c^2 sum_{j<j'} x_j x_j' Z_j Z_j']),
// applied as a single diagonal phase layer per rep.
ParamCircuit build_iqp_feature_map(const FeatureMapSpec& spec, std::span<const double> x);

ParamCircuit build_feature_map(const FeatureMapSpec& spec, std::span<const double> x);

// RealAmplitudes: reps+1 RY rotation layers with CX entanglement layers in
// between. HardwareEfficientSu2: same layout with RY then RZ per rotation layer.
ParamCircuit build_ansatz(const AnsatzSpec& spec, std::span<const double> theta);

Statevector run_circuit(const ParamCircuit& circuit);
void run_circuit_on(Statevector& state, const ParamCircuit& circuit);

struct CircuitPlan {
    AnsatzSpec ansatz;
    FeatureMapSpec feature_map;
};

void validate_plan(const CircuitPlan& plan);

// U_phi(x) U(theta) |0...0>, in exactly that order.
Statevector state_prep(const AnsatzSpec& ansatz, const FeatureMapSpec& fmap,
                       std::span<const double> theta, std::span<const double> x);
Statevector state_prep(const CircuitPlan& plan, std::span<const double> theta,
                       std::span<const double> x);

} // namespace qka
