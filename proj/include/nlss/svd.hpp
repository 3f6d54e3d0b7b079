#pragma once

#include "nlss/tensor.hpp"

#include <Eigen/Dense>

#include <vector>

namespace nlss {

// Full factorization m = u * diag(s) * v^T (rectangular diag).  u and v are
// square orthonormal; s is descending and non-negative.  Signs are fixed so
// that the largest-magnitude entry of every u column is positive (ties broken
// by lowest row index), which makes the factorization a pure function of the
// input bits.
struct MatrixFactorization {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
};

MatrixFactorization svd(const Eigen::MatrixXd& m);

// Left singular vectors only, same sign convention as svd().
Eigen::MatrixXd left_singular_vectors(const Eigen::MatrixXd& m);       // square
Eigen::MatrixXd left_singular_vectors_thin(const Eigen::MatrixXd& m);  // min(rows, cols) columns

// Tucker decomposition with orthonormal square factors: the mode-i factor is
// the left singular matrix of the mode-i unfolding, and the core is the input
// contracted against every factor transpose.  Core and input share extents.
struct HosvdDecomposition {
    Tensor core;
    std::vector<Eigen::MatrixXd> factors;
};

HosvdDecomposition hosvd(const Tensor& t);

// Chains the core through every factor.  Factors may be column-truncated;
// each factor's column count must match the core extent at its mode.
Tensor hosvd_reconstruct(const HosvdDecomposition& d);

}  // namespace nlss
