#include "nlss/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nlss {

namespace {

std::size_t checked_product(const std::vector<std::size_t>& dims) {
    if (dims.empty()) {
        throw std::invalid_argument("tensor: extent list must be non-empty");
    }
    std::size_t p = 1;
    for (std::size_t d : dims) {
        if (d == 0) {
            throw std::invalid_argument("tensor: every extent must be >= 1");
        }
        p *= d;
    }
    return p;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), data_(checked_product(dims_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : dims_(std::move(dims)), data_(std::move(values)) {
    if (checked_product(dims_) != data_.size()) {
        throw std::invalid_argument("tensor: value buffer length does not match extents");
    }
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != dims_.size()) {
        throw std::invalid_argument("tensor: index arity does not match order");
    }
    std::size_t flat = 0;
    std::size_t stride = 1;
    std::size_t mode = 0;
    for (std::size_t i : idx) {
        if (i >= dims_[mode]) {
            throw std::out_of_range("tensor: index out of range at mode " + std::to_string(mode));
        }
        flat += i * stride;
        stride *= dims_[mode];
        ++mode;
    }
    return flat;
}

Eigen::MatrixXd unfold(const Tensor& t, std::size_t mode) {
    if (mode >= t.order()) {
        throw std::invalid_argument("unfold: mode " + std::to_string(mode) +
                                    " out of range for order " + std::to_string(t.order()));
    }
    const auto& d = t.dims();
    std::size_t left = 1;
    std::size_t right = 1;
    for (std::size_t k = 0; k < mode; ++k) left *= d[k];
    for (std::size_t k = mode + 1; k < d.size(); ++k) right *= d[k];
    const std::size_t m = d[mode];

    Eigen::MatrixXd out(static_cast<Eigen::Index>(m),
                        static_cast<Eigen::Index>(left * right));
    const double* src = t.data();
    // flat = l + left*(i + m*r)  maps to  out(i, l + left*r)
    for (std::size_t r = 0; r < right; ++r) {
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = src + left * (i + m * r);
            double* dst = out.data() + (i + m * (left * r));
            for (std::size_t l = 0; l < left; ++l) {
                dst[l * m] = row[l];
            }
        }
    }
    return out;
}

Tensor fold(const Eigen::MatrixXd& m, std::size_t mode, std::vector<std::size_t> dims) {
    if (mode >= dims.size()) {
        throw std::invalid_argument("fold: mode out of range");
    }
    std::size_t left = 1;
    std::size_t right = 1;
    for (std::size_t k = 0; k < mode; ++k) left *= dims[k];
    for (std::size_t k = mode + 1; k < dims.size(); ++k) right *= dims[k];
    const std::size_t rows = dims[mode];
    if (static_cast<std::size_t>(m.rows()) != rows ||
        static_cast<std::size_t>(m.cols()) != left * right) {
        throw std::invalid_argument("fold: matrix shape inconsistent with extents and mode");
    }

    Tensor t(std::move(dims));
    double* dst = t.data();
    for (std::size_t r = 0; r < right; ++r) {
        for (std::size_t i = 0; i < rows; ++i) {
            const double* srccol = m.data() + (i + rows * (left * r));
            double* row = dst + left * (i + rows * r);
            for (std::size_t l = 0; l < left; ++l) {
                row[l] = srccol[l * rows];
            }
        }
    }
    return t;
}

Tensor mode_product(const Tensor& t, const Eigen::MatrixXd& m, std::size_t mode) {
    if (mode >= t.order()) {
        throw std::invalid_argument("mode_product: mode out of range");
    }
    if (static_cast<std::size_t>(m.cols()) != t.dim(mode)) {
        throw std::invalid_argument("mode_product: matrix column count " +
                                    std::to_string(m.cols()) + " does not match extent " +
                                    std::to_string(t.dim(mode)) + " at mode " +
                                    std::to_string(mode));
    }
    Eigen::MatrixXd res = m * unfold(t, mode);
    std::vector<std::size_t> dims = t.dims();
    dims[mode] = static_cast<std::size_t>(m.rows());
    return fold(res, mode, std::move(dims));
}

double frobenius_norm(const Tensor& t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        acc += t[i] * t[i];
    }
    return std::sqrt(acc);
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Tensor tensor_from_matrix(const Eigen::MatrixXd& m) {
    std::vector<double> values(m.data(), m.data() + m.size());
    return Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                  std::move(values));
}

}  // namespace nlss
