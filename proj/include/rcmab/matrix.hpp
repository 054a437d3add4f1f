#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace rcmab {

// Dense row-major matrix of doubles. Everything in this library is at most
// |S| x K (16 x 16 for the paper-scale scenarios), so a flat vector is all
// that is needed.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double& at(std::size_t r, std::size_t c) {
        check(r, c);
        return data_[r * cols_ + c];
    }
    double at(std::size_t r, std::size_t c) const {
        check(r, c);
        return data_[r * cols_ + c];
    }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> flat() { return data_; }
    std::span<const double> flat() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    void check(std::size_t r, std::size_t c) const {
        if (r >= rows_ || c >= cols_) throw std::out_of_range("Matrix: index out of range");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace rcmab
