#include "nlss/filters.hpp"

#include "nlss/svd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nlss {

namespace {

void hard_threshold(Tensor& t, double tau) {
    double* v = t.data();
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(v[i]) < tau) v[i] = 0.0;
    }
}

void hard_threshold(Eigen::MatrixXd& m, double tau) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (std::abs(m.data()[i]) < tau) m.data()[i] = 0.0;
    }
}

// Opponent signal for the group transform: channel sum for ps x ps x 3 x K
// color groups, the group itself otherwise.
Tensor opponent_group(const Tensor& group) {
    if (group.order() != 4 || group.dim(2) != 3) {
        return group;
    }
    const std::size_t ph = group.dim(0), pw = group.dim(1), k = group.dim(3);
    Tensor opp({ph, pw, k});
    const double* src = group.data();
    double* dst = opp.data();
    const std::size_t plane = ph * pw;
    for (std::size_t m = 0; m < k; ++m) {
        const double* g0 = src + plane * 3 * m;
        double* o = dst + plane * m;
        for (std::size_t p = 0; p < plane; ++p) {
            o[p] = g0[p] + g0[p + plane] + g0[p + 2 * plane];
        }
    }
    return opp;
}

}  // namespace

Tensor hosvd_hard(const Tensor& group, double tau) {
    if (tau < 0.0) {
        throw std::invalid_argument("hosvd_hard: tau must be >= 0");
    }
    HosvdDecomposition d = hosvd(group);
    hard_threshold(d.core, tau);
    return hosvd_reconstruct(d);
}

Tensor hosvd_truncate(const Tensor& group, const std::vector<std::size_t>& multirank) {
    if (multirank.size() > group.order()) {
        throw std::invalid_argument("hosvd_truncate: more ranks than modes");
    }
    std::vector<std::size_t> ranks(group.order());
    for (std::size_t mode = 0; mode < group.order(); ++mode) {
        const std::size_t r = mode < multirank.size() ? multirank[mode] : group.dim(mode);
        if (r == 0 || r > group.dim(mode)) {
            throw std::invalid_argument("hosvd_truncate: rank " + std::to_string(r) +
                                        " invalid for extent " + std::to_string(group.dim(mode)) +
                                        " at mode " + std::to_string(mode));
        }
        ranks[mode] = r;
    }

    HosvdDecomposition d = hosvd(group);
    for (std::size_t mode = 0; mode < group.order(); ++mode) {
        d.factors[mode] = d.factors[mode].leftCols(static_cast<Eigen::Index>(ranks[mode])).eval();
    }
    // Projecting onto the truncated factors equals slicing the leading core block.
    Tensor core = group;
    for (std::size_t mode = 0; mode < group.order(); ++mode) {
        core = mode_product(core, d.factors[mode].transpose(), mode);
    }
    d.core = std::move(core);
    return hosvd_reconstruct(d);
}

Tensor msvd_hard(const Tensor& group, double tau) {
    if (tau < 0.0) {
        throw std::invalid_argument("msvd_hard: tau must be >= 0");
    }
    if (group.order() < 2) {
        throw std::invalid_argument("msvd_hard: group order must be >= 2");
    }
    const std::size_t group_mode = group.order() - 1;
    const Eigen::MatrixXd g = unfold(group, group_mode);  // K x (patch voxels)

    const Tensor opp = opponent_group(group);
    const Eigen::MatrixXd u = left_singular_vectors(unfold(opp, opp.order() - 1));
    if (u.rows() != g.rows()) {
        throw std::invalid_argument("msvd_hard: opponent group size mismatch");
    }
    const Eigen::MatrixXd v = left_singular_vectors_thin(g.transpose());

    Eigen::MatrixXd core = u.transpose() * g * v;
    hard_threshold(core, tau);
    const Eigen::MatrixXd ghat = u * core * v.transpose();
    return fold(ghat, group_mode, group.dims());
}

}  // namespace nlss
