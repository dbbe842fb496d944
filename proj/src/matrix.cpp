#include "ecl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecl/error.hpp"

namespace ecl {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                         " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void affine(const Matrix& x, const Matrix& w, std::span<const double> bias, Matrix& out) {
    if (x.cols() != w.cols() || bias.size() != w.rows()) {
        throw ShapeError("affine: input " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " vs weights " + std::to_string(w.rows()) +
                         "x" + std::to_string(w.cols()));
    }
    if (out.rows() != x.rows() || out.cols() != w.rows()) out = Matrix(x.rows(), w.rows());
    const std::size_t in = x.cols();
    for (std::size_t b = 0; b < x.rows(); ++b) {
        const double* xr = x.row(b).data();
        double* yr = out.row(b).data();
        for (std::size_t o = 0; o < w.rows(); ++o) {
            const double* wr = w.row(o).data();
            double acc = bias[o];
            for (std::size_t i = 0; i < in; ++i) acc += wr[i] * xr[i];
            yr[o] = acc;
        }
    }
}

}  // namespace ecl
