#pragma once

// Independent reference implementations used to cross-check the library.
// Nothing here calls into the production decomposition, matching or metric
// code paths: the SVD is a hand-rolled one-sided Jacobi iteration, and the
// metric/matching oracles are direct-formula loops.

#include "nlss/image.hpp"
#include "nlss/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Svd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
};

namespace detail {

// One-sided Jacobi on a matrix with rows >= cols: rotates column pairs until
// they are mutually orthogonal.  Returns thin U (zero columns for zero
// singular values), all singular values, and the full accumulated V.
inline Svd jacobi_tall(Eigen::MatrixXd b) {
    const Eigen::Index n = b.cols();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 128; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = b.col(p).squaredNorm();
                const double beta = b.col(q).squaredNorm();
                const double gamma = b.col(p).dot(b.col(q));
                if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index r = 0; r < b.rows(); ++r) {
                    const double bp = b(r, p), bq = b(r, q);
                    b(r, p) = c * bp - s * bq;
                    b(r, q) = s * bp + c * bq;
                }
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double vp = v(r, p), vq = v(r, q);
                    v(r, p) = c * vp - s * vq;
                    v(r, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }
    Svd out;
    out.s.resize(n);
    out.u.resize(b.rows(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.s(j) = b.col(j).norm();
        out.u.col(j) = out.s(j) > 0 ? Eigen::VectorXd(b.col(j) / out.s(j))
                                    : Eigen::VectorXd::Zero(b.rows());
    }
    out.v = v;
    return out;
}

inline void sort_descending(Svd& f) {
    std::vector<Eigen::Index> order(f.s.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return f.s(a) > f.s(b); });
    Eigen::MatrixXd u(f.u.rows(), f.u.cols()), v(f.v.rows(), f.v.cols());
    Eigen::VectorXd s(f.s.size());
    for (Eigen::Index j = 0; j < f.s.size(); ++j) {
        s(j) = f.s(order[j]);
        u.col(j) = f.u.col(order[j]);
        v.col(j) = f.v.col(order[j]);
    }
    f.u = u;
    f.s = s;
    f.v = v;
}

// Same orientation rule the library documents: the largest-magnitude entry of
// each left column is made positive (ties at the lowest row index), the paired
// right column flips with it.
inline void orient(Svd& f) {
    const Eigen::Index paired = std::min(f.u.cols(), f.v.cols());
    for (Eigen::Index j = 0; j < f.u.cols(); ++j) {
        Eigen::Index dom = 0;
        for (Eigen::Index r = 1; r < f.u.rows(); ++r)
            if (std::abs(f.u(r, j)) > std::abs(f.u(dom, j))) dom = r;
        if (f.u(dom, j) < 0) {
            f.u.col(j) = -f.u.col(j);
            if (j < paired) f.v.col(j) = -f.v.col(j);
        }
    }
    for (Eigen::Index j = f.u.cols(); j < f.v.cols(); ++j) {
        Eigen::Index dom = 0;
        for (Eigen::Index r = 1; r < f.v.rows(); ++r)
            if (std::abs(f.v(r, j)) > std::abs(f.v(dom, j))) dom = r;
        if (f.v(dom, j) < 0) f.v.col(j) = -f.v.col(j);
    }
}

}  // namespace detail

// Jacobi SVD of any matrix.  For rows >= cols: u is thin (rows x cols), v is
// cols x cols.  For rows < cols the transposed problem is solved, so u comes
// back square (rows x rows) and v thin.
inline Svd jacobi_svd(const Eigen::MatrixXd& a) {
    Svd f;
    if (a.rows() >= a.cols()) {
        f = detail::jacobi_tall(a);
    } else {
        Svd ft = detail::jacobi_tall(a.transpose());
        f.u = ft.v;
        f.s = ft.s;
        f.v = ft.u;
    }
    detail::sort_descending(f);
    detail::orient(f);
    return f;
}

// ---- matching ------------------------------------------------------------

struct MatchHit {
    int row, col, slice;
    double d2;
};

// Brute-force similar-patch search.  Re-derives the matching surface
// (channel/band sum, or raw voxels for volumes) with its own loops.
inline std::vector<MatchHit> brute_match(const nlss::Image& img, int ref_r, int ref_c,
                                         int ref_s, std::size_t ps, int radius,
                                         int temporal_radius, std::size_t k) {
    using nlss::ImageLayout;
    const int h = static_cast<int>(img.height());
    const int w = static_cast<int>(img.width());
    const bool volume = img.layout == ImageLayout::Volume;
    const bool video = img.layout == ImageLayout::Video;

    auto plane_at = [&](int r, int c, int s) {
        switch (img.layout) {
            case ImageLayout::Gray: return img.tensor(r, c);
            case ImageLayout::Color:
            case ImageLayout::Multiband: {
                double acc = 0.0;
                for (std::size_t b = 0; b < img.depth(); ++b) acc += img.tensor(r, c, b);
                return acc;
            }
            case ImageLayout::Video: {
                double acc = 0.0;
                for (std::size_t ch = 0; ch < 3; ++ch) acc += img.tensor(r, c, ch, s);
                return acc;
            }
            case ImageLayout::Volume: return img.tensor(r, c, s);
        }
        return 0.0;
    };

    auto dist2 = [&](int r, int c, int s) {
        double acc = 0.0;
        if (volume) {
            for (std::size_t d = 0; d < ps; ++d)
                for (std::size_t j = 0; j < ps; ++j)
                    for (std::size_t i = 0; i < ps; ++i) {
                        const double diff =
                            img.tensor(ref_r + i, ref_c + j, ref_s + d) -
                            img.tensor(r + i, c + j, s + d);
                        acc += diff * diff;
                    }
        } else {
            for (std::size_t j = 0; j < ps; ++j)
                for (std::size_t i = 0; i < ps; ++i) {
                    const double diff = plane_at(ref_r + static_cast<int>(i),
                                                 ref_c + static_cast<int>(j), ref_s) -
                                        plane_at(r + static_cast<int>(i),
                                                 c + static_cast<int>(j), s);
                    acc += diff * diff;
                }
        }
        return acc;
    };

    int s_lo = 0, s_hi = 0;
    if (video) {
        s_lo = std::max(0, ref_s - temporal_radius);
        s_hi = std::min(static_cast<int>(img.frames()) - 1, ref_s + temporal_radius);
    } else if (volume) {
        s_lo = std::max(0, ref_s - temporal_radius);
        s_hi = std::min(static_cast<int>(img.depth()) - static_cast<int>(ps),
                        ref_s + temporal_radius);
    }

    std::vector<MatchHit> hits;
    for (int s = s_lo; s <= s_hi; ++s)
        for (int r = std::max(0, ref_r - radius);
             r <= std::min(h - static_cast<int>(ps), ref_r + radius); ++r)
            for (int c = std::max(0, ref_c - radius);
                 c <= std::min(w - static_cast<int>(ps), ref_c + radius); ++c) {
                if (r == ref_r && c == ref_c && s == ref_s) continue;
                hits.push_back({r, c, s, dist2(r, c, s)});
            }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const MatchHit& a, const MatchHit& b) { return a.d2 < b.d2; });
    if (hits.size() > k - 1) hits.resize(k - 1);
    hits.insert(hits.begin(), {ref_r, ref_c, ref_s, 0.0});
    return hits;
}

// ---- metrics -------------------------------------------------------------

// Direct double-loop windowed SSIM on one plane: every local statistic is
// recomputed from scratch per center pixel.
inline double ssim_plane_direct(const double* x, const double* y, std::size_t h,
                                std::size_t w, double peak) {
    constexpr int win = 11;
    constexpr double wsigma = 1.5;
    double kernel[win][win];
    double wsum = 0.0;
    for (int a = 0; a < win; ++a)
        for (int b = 0; b < win; ++b) {
            const double da = a - 5, db = b - 5;
            kernel[a][b] = std::exp(-(da * da + db * db) / (2.0 * wsigma * wsigma));
            wsum += kernel[a][b];
        }
    for (int a = 0; a < win; ++a)
        for (int b = 0; b < win; ++b) kernel[a][b] /= wsum;

    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + win <= h; ++i)
        for (std::size_t j = 0; j + win <= w; ++j) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int a = 0; a < win; ++a)
                for (int b = 0; b < win; ++b) {
                    const double xv = x[(i + a) + h * (j + b)];
                    const double yv = y[(i + a) + h * (j + b)];
                    const double kw = kernel[a][b];
                    mx += kw * xv;
                    my += kw * yv;
                    mxx += kw * xv * xv;
                    myy += kw * yv * yv;
                    mxy += kw * xv * yv;
                }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cov = mxy - mx * my;
            acc += ((2 * mx * my + c1) * (2 * cov + c2)) /
                   ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return acc / static_cast<double>(count);
}

inline double sam_direct(const nlss::Image& ref, const nlss::Image& test) {
    const std::size_t h = ref.height(), w = ref.width(), bands = ref.depth();
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t r = 0; r < h; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            double dot = 0, nr = 0, nt = 0;
            for (std::size_t b = 0; b < bands; ++b) {
                dot += ref.tensor(r, c, b) * test.tensor(r, c, b);
                nr += ref.tensor(r, c, b) * ref.tensor(r, c, b);
                nt += test.tensor(r, c, b) * test.tensor(r, c, b);
            }
            if (std::sqrt(nr) < 1e-12 || std::sqrt(nt) < 1e-12) continue;
            double cosv = dot / (std::sqrt(nr) * std::sqrt(nt));
            cosv = std::clamp(cosv, -1.0, 1.0);
            acc += std::acos(cosv);
            ++used;
        }
    if (used == 0) throw std::runtime_error("oracle: empty mask");
    return acc / static_cast<double>(used);
}

inline double ergas_direct(const nlss::Image& ref, const nlss::Image& test,
                           double ratio = 1.0) {
    const std::size_t h = ref.height(), w = ref.width(), bands = ref.depth();
    double acc = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
        double mean = 0, sq = 0;
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) {
                mean += ref.tensor(r, c, b);
                const double d = ref.tensor(r, c, b) - test.tensor(r, c, b);
                sq += d * d;
            }
        mean /= static_cast<double>(h * w);
        const double rmse = std::sqrt(sq / static_cast<double>(h * w));
        acc += (rmse / mean) * (rmse / mean);
    }
    return 100.0 * ratio * std::sqrt(acc / static_cast<double>(bands));
}

// Mask-then-compute oracle: collect foreground voxels into flat lists and run
// the plain PSNR formula on them.
inline double foreground_psnr_direct(const nlss::Image& ref, const nlss::Image& test,
                                     double peak) {
    std::vector<double> rs, ts;
    for (std::size_t i = 0; i < ref.tensor.size(); ++i)
        if (ref.tensor[i] > 10.0 * peak / 255.0) {
            rs.push_back(ref.tensor[i]);
            ts.push_back(test.tensor[i]);
        }
    double mse = 0.0;
    for (std::size_t i = 0; i < rs.size(); ++i)
        mse += (rs[i] - ts[i]) * (rs[i] - ts[i]);
    mse /= static_cast<double>(rs.size());
    return 10.0 * std::log10(peak * peak / mse);
}

// Total variation (anisotropic), used to compare smoothness of two results.
inline double total_variation(const nlss::Image& img) {
    double tv = 0.0;
    const std::size_t h = img.height(), w = img.width();
    const std::size_t planes = img.tensor.size() / (h * w);
    const double* p = img.tensor.data();
    for (std::size_t q = 0; q < planes; ++q) {
        const double* s = p + q * h * w;
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t i = 0; i < h; ++i) {
                if (i + 1 < h) tv += std::abs(s[(i + 1) + h * j] - s[i + h * j]);
                if (j + 1 < w) tv += std::abs(s[i + h * (j + 1)] - s[i + h * j]);
            }
    }
    return tv;
}

}  // namespace oracle
