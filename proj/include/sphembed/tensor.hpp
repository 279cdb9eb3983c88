#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphembed {

/// Violated precondition or shape contract.
struct contract_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value or other numerical-domain failure.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

/// Dense row-major tensor of 64-bit floats.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);
    static Tensor row_matrix(std::size_t rows, std::size_t cols,
                             std::vector<double> data);

    const Shape &shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }

    double *data() { return data_.data(); }
    const double *data() const { return data_.data(); }

    double &operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double &at2(std::size_t i, std::size_t j) {
        return data_[i * shape_[1] + j];
    }
    double at2(std::size_t i, std::size_t j) const {
        return data_[i * shape_[1] + j];
    }
    // NHWC indexing
    double &at4(std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
        return data_[((n * shape_[1] + h) * shape_[2] + w) * shape_[3] + c];
    }
    double at4(std::size_t n, std::size_t h, std::size_t w,
               std::size_t c) const {
        return data_[((n * shape_[1] + h) * shape_[2] + w) * shape_[3] + c];
    }

    bool same_shape(const Tensor &other) const {
        return shape_ == other.shape_;
    }
    bool all_finite() const;

    void fill(double value);
    Tensor reshaped(Shape shape) const;

    std::vector<double> &vec() { return data_; }
    const std::vector<double> &vec() const { return data_; }

  private:
    Shape shape_;
    std::vector<double> data_;
};

std::size_t shape_size(const Shape &shape);
std::string shape_str(const Shape &shape);

} // namespace sphembed
