#include "sphembed/tensor.hpp"

#include <cmath>
#include <sstream>

namespace sphembed {

std::size_t shape_size(const Shape &shape) {
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

std::string shape_str(const Shape &shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
        os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_size(shape_) != data_.size())
        throw contract_error("tensor data length " +
                             std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

Tensor Tensor::row_matrix(std::size_t rows, std::size_t cols,
                          std::vector<double> data) {
    return Tensor({rows, cols}, std::move(data));
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v))
            return false;
    return true;
}

void Tensor::fill(double value) {
    for (double &v : data_)
        v = value;
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size())
        throw contract_error("reshape to " + shape_str(shape) +
                             " changes element count");
    return Tensor(std::move(shape), data_);
}

} // namespace sphembed
