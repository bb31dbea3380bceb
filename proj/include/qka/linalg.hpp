#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qka {

// Dense row-major real matrix. Small sizes only (kernels up to a few hundred
// rows); no BLAS behind it.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

double min_symmetric_eigenvalue(const Matrix& m);

} // namespace qka
