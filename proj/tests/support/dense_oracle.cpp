#include "support/dense_oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qka::testing {

CMatrix identity(std::size_t dim) {
    CMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

CMatrix matmul(const CMatrix& lhs, const CMatrix& rhs) {
    if (lhs.dim != rhs.dim) throw std::invalid_argument("dimension mismatch");
    CMatrix out(lhs.dim);
    for (std::size_t i = 0; i < lhs.dim; ++i) {
        for (std::size_t k = 0; k < lhs.dim; ++k) {
            const czd v = lhs.at(i, k);
            if (v == czd{}) continue;
            for (std::size_t j = 0; j < lhs.dim; ++j) out.at(i, j) += v * rhs.at(k, j);
        }
    }
    return out;
}

CVec matvec(const CMatrix& m, const CVec& v) {
    if (m.dim != v.size()) throw std::invalid_argument("dimension mismatch");
    CVec out(m.dim, czd{});
    for (std::size_t i = 0; i < m.dim; ++i) {
        for (std::size_t j = 0; j < m.dim; ++j) out[i] += m.at(i, j) * v[j];
    }
    return out;
}

CMatrix kron(const CMatrix& high, const CMatrix& low) {
    CMatrix out(high.dim * low.dim);
    for (std::size_t hr = 0; hr < high.dim; ++hr) {
        for (std::size_t hc = 0; hc < high.dim; ++hc) {
            for (std::size_t lr = 0; lr < low.dim; ++lr) {
                for (std::size_t lc = 0; lc < low.dim; ++lc) {
                    out.at(hr * low.dim + lr, hc * low.dim + lc) = high.at(hr, hc) * low.at(lr, lc);
                }
            }
        }
    }
    return out;
}

CMatrix h_matrix() {
    CMatrix m(2);
    const double inv = 1.0 / std::sqrt(2.0);
    m.at(0, 0) = inv;
    m.at(0, 1) = inv;
    m.at(1, 0) = inv;
    m.at(1, 1) = -inv;
    return m;
}

CMatrix x_matrix() {
    CMatrix m(2);
    m.at(0, 1) = 1.0;
    m.at(1, 0) = 1.0;
    return m;
}

CMatrix ry_matrix(double angle) {
    CMatrix m(2);
    m.at(0, 0) = std::cos(angle / 2);
    m.at(0, 1) = -std::sin(angle / 2);
    m.at(1, 0) = std::sin(angle / 2);
    m.at(1, 1) = std::cos(angle / 2);
    return m;
}

CMatrix rz_matrix(double angle) {
    CMatrix m(2);
    m.at(0, 0) = std::exp(czd(0.0, -angle / 2));
    m.at(1, 1) = std::exp(czd(0.0, angle / 2));
    return m;
}

CMatrix embed_single(const CMatrix& gate, int qubit, int n_qubits) {
    // Little-endian: qubit 0 is the last kron factor.
    CMatrix out = (qubit == n_qubits - 1) ? gate : identity(2);
    for (int q = n_qubits - 2; q >= 0; --q) {
        out = kron(out, q == qubit ? gate : identity(2));
    }
    if (n_qubits == 1) out = gate;
    return out;
}

CMatrix cx_matrix(int control, int target, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    CMatrix out(dim);
    for (std::size_t b = 0; b < dim; ++b) {
        std::size_t to = b;
        if ((b >> control) & 1) to = b ^ (std::size_t{1} << target);
        out.at(to, b) = 1.0;
    }
    return out;
}

CMatrix diag_phase_matrix(std::span<const double> phases) {
    CMatrix out(phases.size());
    for (std::size_t b = 0; b < phases.size(); ++b) out.at(b, b) = std::exp(czd(0.0, phases[b]));
    return out;
}

CMatrix hadamard_layer(int n_qubits) {
    CMatrix out = h_matrix();
    for (int q = 1; q < n_qubits; ++q) out = kron(out, h_matrix());
    return out;
}

namespace {

double z_of(std::size_t basis, int qubit) { return (basis >> qubit) & 1 ? -1.0 : 1.0; }

std::vector<double> quadratic_phases(int n_qubits, std::span<const double> linear,
                                     std::span<const double> pairwise_flat) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    std::vector<double> phases(dim, 0.0);
    for (std::size_t b = 0; b < dim; ++b) {
        double phi = 0.0;
        std::size_t pair = 0;
        for (int i = 0; i < n_qubits; ++i) {
            phi += linear[i] * z_of(b, i);
            for (int j = i + 1; j < n_qubits; ++j, ++pair) {
                phi += pairwise_flat[pair] * z_of(b, i) * z_of(b, j);
            }
        }
        phases[b] = phi;
    }
    return phases;
}

CMatrix entangler(int n_qubits, bool full) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    CMatrix out = identity(dim);
    if (full) {
        for (int a = 0; a < n_qubits; ++a) {
            for (int b = a + 1; b < n_qubits; ++b) out = matmul(cx_matrix(a, b, n_qubits), out);
        }
    } else {
        for (int q = 0; q + 1 < n_qubits; ++q) out = matmul(cx_matrix(q, q + 1, n_qubits), out);
    }
    return out;
}

} // namespace

CMatrix zz_map_matrix(int n_qubits, std::span<const double> x, int reps) {
    constexpr double pi = std::numbers::pi;
    std::vector<double> pairwise;
    for (int i = 0; i < n_qubits; ++i) {
        for (int j = i + 1; j < n_qubits; ++j) pairwise.push_back((pi - x[i]) * (pi - x[j]));
    }
    const CMatrix d = diag_phase_matrix(quadratic_phases(n_qubits, x, pairwise));
    const CMatrix h = hadamard_layer(n_qubits);
    CMatrix out = identity(std::size_t{1} << n_qubits);
    for (int r = 0; r < reps; ++r) out = matmul(d, matmul(h, out));
    return out;
}

CMatrix iqp_map_matrix(int n_qubits, std::span<const double> x, double bandwidth, int reps) {
    std::vector<double> linear(n_qubits);
    std::vector<double> pairwise;
    for (int i = 0; i < n_qubits; ++i) linear[i] = bandwidth * x[i];
    for (int i = 0; i < n_qubits; ++i) {
        for (int j = i + 1; j < n_qubits; ++j) {
            pairwise.push_back(bandwidth * bandwidth * x[i] * x[j]);
        }
    }
    const CMatrix d = diag_phase_matrix(quadratic_phases(n_qubits, linear, pairwise));
    const CMatrix h = hadamard_layer(n_qubits);
    CMatrix out = identity(std::size_t{1} << n_qubits);
    for (int r = 0; r < reps; ++r) out = matmul(d, matmul(h, out));
    return out;
}

CMatrix real_amplitudes_matrix(int n_qubits, int reps, std::span<const double> theta,
                               bool full_entanglement) {
    CMatrix out = identity(std::size_t{1} << n_qubits);
    std::size_t next = 0;
    auto rotation = [&] {
        for (int q = 0; q < n_qubits; ++q) {
            out = matmul(embed_single(ry_matrix(theta[next++]), q, n_qubits), out);
        }
    };
    rotation();
    for (int r = 0; r < reps; ++r) {
        out = matmul(entangler(n_qubits, full_entanglement), out);
        rotation();
    }
    return out;
}

CMatrix hardware_efficient_matrix(int n_qubits, int reps, std::span<const double> theta,
                                  bool full_entanglement) {
    CMatrix out = identity(std::size_t{1} << n_qubits);
    std::size_t next = 0;
    auto rotation = [&] {
        for (int q = 0; q < n_qubits; ++q) {
            out = matmul(embed_single(ry_matrix(theta[next++]), q, n_qubits), out);
        }
        for (int q = 0; q < n_qubits; ++q) {
            out = matmul(embed_single(rz_matrix(theta[next++]), q, n_qubits), out);
        }
    };
    rotation();
    for (int r = 0; r < reps; ++r) {
        out = matmul(entangler(n_qubits, full_entanglement), out);
        rotation();
    }
    return out;
}

CVec zero_state(int n_qubits) {
    CVec v(std::size_t{1} << n_qubits, czd{});
    v[0] = 1.0;
    return v;
}

CVec apply_to_zero(const CMatrix& m) {
    CVec v(m.dim, czd{});
    v[0] = 1.0;
    return matvec(m, v);
}

double fidelity_oracle(const CVec& a, const CVec& b) {
    czd acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return std::norm(acc);
}

} // namespace qka::testing
