#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace specnet {

/// Error raised on malformed shapes, specs, or inputs.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Shape {
    std::size_t channels = 0;
    std::size_t length = 0;

    std::size_t size() const { return channels * length; }
    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Real channels x length array, stored channel-major (row c holds positions 0..length-1).
class Tensor2 {
public:
    Tensor2() = default;
    Tensor2(std::size_t channels, std::size_t length, double fill = 0.0);
    Tensor2(std::size_t channels, std::size_t length, std::vector<double> data);

    std::size_t channels() const { return shape_.channels; }
    std::size_t length() const { return shape_.length; }
    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t c, std::size_t j) { return data_[c * shape_.length + j]; }
    double operator()(std::size_t c, std::size_t j) const { return data_[c * shape_.length + j]; }

    std::span<double> row(std::size_t c) { return {data_.data() + c * shape_.length, shape_.length}; }
    std::span<const double> row(std::size_t c) const
    {
        return {data_.data() + c * shape_.length, shape_.length};
    }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }
    std::vector<double> release() && { return std::move(data_); }

    /// Reinterprets the same row-major storage under a new shape of equal size.
    void reshape(std::size_t channels, std::size_t length);

    bool all_finite() const;

private:
    Shape shape_;
    std::vector<double> data_;
};

/// Dense row-major matrix used for dense layers and materialized linear maps.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n);
    std::vector<double> apply(std::span<const double> x) const;
};

} // namespace specnet
