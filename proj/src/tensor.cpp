#include "specnet/tensor.hpp"

#include <cmath>

namespace specnet {

std::string to_string(const Shape& s)
{
    return std::to_string(s.channels) + "x" + std::to_string(s.length);
}

Tensor2::Tensor2(std::size_t channels, std::size_t length, double fill)
    : shape_{channels, length}, data_(channels * length, fill)
{
}

Tensor2::Tensor2(std::size_t channels, std::size_t length, std::vector<double> data)
    : shape_{channels, length}, data_(std::move(data))
{
    if (data_.size() != channels * length) {
        throw ShapeError("Tensor2: data size " + std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
    }
}

void Tensor2::reshape(std::size_t channels, std::size_t length)
{
    if (channels * length != data_.size()) {
        throw ShapeError("Tensor2::reshape: cannot view " + to_string(shape_) + " as " +
                         std::to_string(channels) + "x" + std::to_string(length));
    }
    shape_ = {channels, length};
}

bool Tensor2::all_finite() const
{
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix Matrix::identity(std::size_t n)
{
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> Matrix::apply(std::span<const double> x) const
{
    if (x.size() != cols) throw ShapeError("Matrix::apply: dimension mismatch");
    std::vector<double> y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* r = data.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}

} // namespace specnet
