#include "nlss/svd.hpp"

#include <stdexcept>
#include <string>

namespace nlss {

namespace {

Eigen::Index dominant_row(const Eigen::Ref<const Eigen::VectorXd>& col) {
    Eigen::Index best = 0;
    double mag = std::abs(col(0));
    for (Eigen::Index i = 1; i < col.size(); ++i) {
        const double a = std::abs(col(i));
        if (a > mag) {
            mag = a;
            best = i;
        }
    }
    return best;
}

// Largest-magnitude entry of each u column made positive; paired v columns
// flip together so the product is preserved.
void fix_signs(Eigen::MatrixXd& u, Eigen::MatrixXd* v, Eigen::Index paired_cols) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        if (u(dominant_row(u.col(j)), j) < 0.0) {
            u.col(j) = -u.col(j);
            if (v != nullptr && j < paired_cols) {
                v->col(j) = -v->col(j);
            }
        }
    }
    if (v != nullptr) {
        for (Eigen::Index j = paired_cols; j < v->cols(); ++j) {
            if ((*v)(dominant_row(v->col(j)), j) < 0.0) {
                v->col(j) = -v->col(j);
            }
        }
    }
}

void require_finite(const Eigen::MatrixXd& m, const char* who) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": input has non-finite entries");
    }
}

}  // namespace

MatrixFactorization svd(const Eigen::MatrixXd& m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<Eigen::MatrixXd> jac(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatrixFactorization f{jac.matrixU(), jac.singularValues(), jac.matrixV()};
    fix_signs(f.u, &f.v, f.s.size());
    return f;
}

Eigen::MatrixXd left_singular_vectors(const Eigen::MatrixXd& m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<Eigen::MatrixXd> jac(m, Eigen::ComputeFullU);
    Eigen::MatrixXd u = jac.matrixU();
    fix_signs(u, nullptr, 0);
    return u;
}

Eigen::MatrixXd left_singular_vectors_thin(const Eigen::MatrixXd& m) {
    require_finite(m, "svd");
    Eigen::JacobiSVD<Eigen::MatrixXd> jac(m, Eigen::ComputeThinU);
    Eigen::MatrixXd u = jac.matrixU();
    fix_signs(u, nullptr, 0);
    return u;
}

HosvdDecomposition hosvd(const Tensor& t) {
    if (t.order() < 2) {
        throw std::invalid_argument("hosvd: tensor order must be >= 2");
    }
    HosvdDecomposition d;
    d.factors.reserve(t.order());
    for (std::size_t mode = 0; mode < t.order(); ++mode) {
        d.factors.push_back(left_singular_vectors(unfold(t, mode)));
    }
    d.core = t;
    for (std::size_t mode = 0; mode < t.order(); ++mode) {
        d.core = mode_product(d.core, d.factors[mode].transpose(), mode);
    }
    return d;
}

Tensor hosvd_reconstruct(const HosvdDecomposition& d) {
    if (d.factors.size() != d.core.order()) {
        throw std::invalid_argument("hosvd_reconstruct: factor count does not match core order");
    }
    for (std::size_t mode = 0; mode < d.factors.size(); ++mode) {
        if (static_cast<std::size_t>(d.factors[mode].cols()) != d.core.dim(mode)) {
            throw std::invalid_argument(
                "hosvd_reconstruct: factor column count does not match core extent at mode " +
                std::to_string(mode));
        }
    }
    Tensor out = d.core;
    for (std::size_t mode = 0; mode < d.factors.size(); ++mode) {
        out = mode_product(out, d.factors[mode], mode);
    }
    return out;
}

}  // namespace nlss
