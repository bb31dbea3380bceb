#pragma once

// Independent dense-matrix circuit oracle for the tests. Everything here is
// built from explicit gate matrices and matrix products - deliberately a
// different route than the simulator's in-place bit updates, so the two can
// check each other. Little-endian qubit ordering matches the library.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qka::testing {

using czd = std::complex<double>;
using CVec = std::vector<czd>;

struct CMatrix {
    std::size_t dim = 0;
    std::vector<czd> a; // row-major

    explicit CMatrix(std::size_t d) : dim(d), a(d * d) {}
    czd& at(std::size_t r, std::size_t c) { return a[r * dim + c]; }
    const czd& at(std::size_t r, std::size_t c) const { return a[r * dim + c]; }
};

CMatrix identity(std::size_t dim);
CMatrix matmul(const CMatrix& lhs, const CMatrix& rhs);
CVec matvec(const CMatrix& m, const CVec& v);
CMatrix kron(const CMatrix& high, const CMatrix& low);

CMatrix h_matrix();
CMatrix x_matrix();
CMatrix ry_matrix(double angle);
CMatrix rz_matrix(double angle);

// Embeds a single-qubit gate at `qubit` of an n-qubit register.
CMatrix embed_single(const CMatrix& gate, int qubit, int n_qubits);
CMatrix cx_matrix(int control, int target, int n_qubits);
CMatrix diag_phase_matrix(std::span<const double> phases);
CMatrix hadamard_layer(int n_qubits);

// Feature maps and ansatze rebuilt from their definitions.
CMatrix zz_map_matrix(int n_qubits, std::span<const double> x, int reps);
CMatrix iqp_map_matrix(int n_qubits, std::span<const double> x, double bandwidth, int reps);
CMatrix real_amplitudes_matrix(int n_qubits, int reps, std::span<const double> theta,
                               bool full_entanglement);
CMatrix hardware_efficient_matrix(int n_qubits, int reps, std::span<const double> theta,
                                  bool full_entanglement);

CVec zero_state(int n_qubits);
CVec apply_to_zero(const CMatrix& m);

double fidelity_oracle(const CVec& a, const CVec& b);

} // namespace qka::testing
