#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace nlss {

// Dense real tensor in first-index-fastest layout: the flat offset of
// (i_0, ..., i_{N-1}) is i_0 + I_0 * (i_1 + I_1 * (i_2 + ...)).  With this
// layout the mode-0 unfolding is a plain reinterpretation of the buffer as a
// column-major matrix.
class Tensor {
public:
    Tensor() = default;

    // Zero-filled tensor. Extents must all be >= 1.
    explicit Tensor(std::vector<std::size_t> dims);

    // Takes ownership of a flat value buffer; its length must equal the
    // product of the extents.
    Tensor(std::vector<std::size_t> dims, std::vector<double> values);

    std::size_t order() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    template <typename... Ix>
    double operator()(Ix... ix) const {
        return data_[offset({static_cast<std::size_t>(ix)...})];
    }
    template <typename... Ix>
    double& operator()(Ix... ix) {
        return data_[offset({static_cast<std::size_t>(ix)...})];
    }

    std::size_t offset(std::initializer_list<std::size_t> idx) const;

    bool same_dims(const Tensor& other) const { return dims_ == other.dims_; }

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

// Mode-n matricization: element (i_n, j) where j enumerates the remaining
// indices with the lowest-numbered index varying fastest.  The unfolding of a
// tensor with extents (I_0, ..., I_{N-1}) at mode n is I_n x (prod of the
// others).
Eigen::MatrixXd unfold(const Tensor& t, std::size_t mode);

// Inverse of unfold: unfold(fold(m, n, dims), n) == m bit-exactly.
Tensor fold(const Eigen::MatrixXd& m, std::size_t mode, std::vector<std::size_t> dims);

// n-mode product: contracts the matrix columns against the mode-n fibers.
// Result extents equal t's with the mode-n extent replaced by m's row count.
Tensor mode_product(const Tensor& t, const Eigen::MatrixXd& m, std::size_t mode);

double frobenius_norm(const Tensor& t);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Order-2 tensor sharing the matrix values (column-major copy).
Tensor tensor_from_matrix(const Eigen::MatrixXd& m);

}  // namespace nlss
