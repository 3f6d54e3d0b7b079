#include "nlss/metrics.hpp"

#include "nlss/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nlss {

namespace {

void check_pair(const Image& ref, const Image& test) {
    if (!ref.tensor.same_dims(test.tensor) || ref.layout != test.layout)
        throw std::invalid_argument("metric operands must share dims and layout");
}

double mse_to_psnr(double mse, double peak) {
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;

std::array<double, kWin> ssim_window() {
    std::array<double, kWin> w{};
    constexpr double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = i - kHalf;
        w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

// Valid-region separable windowed mean of an h x w column-major plane;
// result is (h - 10) x (w - 10).
std::vector<double> window_mean(const std::vector<double>& p, std::size_t h,
                                std::size_t w, const std::array<double, kWin>& win) {
    const std::size_t vw = w - (kWin - 1);
    const std::size_t vh = h - (kWin - 1);
    std::vector<double> tmp(h * vw);
    for (std::size_t j = 0; j < vw; ++j)
        for (std::size_t i = 0; i < h; ++i) {
            double s = 0.0;
            for (int b = 0; b < kWin; ++b) s += win[b] * p[i + h * (j + b)];
            tmp[i + h * j] = s;
        }
    std::vector<double> out(vh * vw);
    for (std::size_t j = 0; j < vw; ++j)
        for (std::size_t i = 0; i < vh; ++i) {
            double s = 0.0;
            for (int a = 0; a < kWin; ++a) s += win[a] * tmp[(i + a) + h * j];
            out[i + vh * j] = s;
        }
    return out;
}

double ssim_plane(const double* x, const double* y, std::size_t h, std::size_t w,
                  double peak) {
    if (h < kWin || w < kWin)
        throw std::invalid_argument("image smaller than the 11x11 comparison window");
    static const std::array<double, kWin> win = ssim_window();
    const std::size_t n = h * w;
    std::vector<double> px(x, x + n), py(y, y + n), pxx(n), pyy(n), pxy(n);
    for (std::size_t i = 0; i < n; ++i) {
        pxx[i] = x[i] * x[i];
        pyy[i] = y[i] * y[i];
        pxy[i] = x[i] * y[i];
    }
    const auto mx = window_mean(px, h, w, win);
    const auto my = window_mean(py, h, w, win);
    const auto mxx = window_mean(pxx, h, w, win);
    const auto myy = window_mean(pyy, h, w, win);
    const auto mxy = window_mean(pxy, h, w, win);

    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = mxx[i] - mx[i] * mx[i];
        const double vy = myy[i] - my[i] * my[i];
        const double cov = mxy[i] - mx[i] * my[i];
        const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
        const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
        acc += num / den;
    }
    return acc / static_cast<double>(mx.size());
}

// Channel planes are contiguous h*w slabs in the first-index-fastest layout.
double ssim_planes(const Image& ref, const Image& test, double peak,
                   std::size_t plane_count) {
    const std::size_t n = ref.height() * ref.width();
    double acc = 0.0;
    for (std::size_t p = 0; p < plane_count; ++p)
        acc += ssim_plane(ref.tensor.data() + p * n, test.tensor.data() + p * n,
                          ref.height(), ref.width(), peak);
    return acc / static_cast<double>(plane_count);
}

}  // namespace

double psnr(const Image& ref, const Image& test, double peak) {
    check_pair(ref, test);
    if (!(peak > 0.0)) throw std::invalid_argument("peak must be positive");
    double acc = 0.0;
    for (std::size_t i = 0; i < ref.tensor.size(); ++i) {
        const double d = ref.tensor[i] - test.tensor[i];
        acc += d * d;
    }
    return mse_to_psnr(acc / static_cast<double>(ref.tensor.size()), peak);
}

double psnr_foreground(const Image& ref, const Image& test, double peak) {
    check_pair(ref, test);
    if (!(peak > 0.0)) throw std::invalid_argument("peak must be positive");
    const double threshold = 10.0 * peak / 255.0;
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.tensor.size(); ++i) {
        if (ref.tensor[i] > threshold) {
            const double d = ref.tensor[i] - test.tensor[i];
            acc += d * d;
            ++n;
        }
    }
    if (n == 0)
        throw EmptyMaskError("foreground mask is empty: no reference voxel exceeds " +
                             std::to_string(threshold));
    return mse_to_psnr(acc / static_cast<double>(n), peak);
}

double ssim(const Image& ref, const Image& test, double peak) {
    check_pair(ref, test);
    if (!(peak > 0.0)) throw std::invalid_argument("peak must be positive");
    switch (ref.layout) {
        case ImageLayout::Gray:
            return ssim_planes(ref, test, peak, 1);
        case ImageLayout::Color:
        case ImageLayout::Multiband:
        case ImageLayout::Volume:
            return ssim_planes(ref, test, peak, ref.depth());
        case ImageLayout::Video: {
            double acc = 0.0;
            for (std::size_t f = 0; f < ref.frames(); ++f)
                acc += ssim(video_frame(ref, f), video_frame(test, f), peak);
            return acc / static_cast<double>(ref.frames());
        }
    }
    throw std::logic_error("unreachable layout");
}

double sam_radians(const Image& ref, const Image& test) {
    check_pair(ref, test);
    if (ref.tensor.order() != 3 || ref.depth() < 2)
        throw std::invalid_argument("spectral angle needs an H x W x B image, B >= 2");
    const std::size_t n = ref.height() * ref.width();
    const std::size_t bands = ref.depth();
    const double* r = ref.tensor.data();
    const double* t = test.tensor.data();
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t px = 0; px < n; ++px) {
        double dot = 0.0, nr = 0.0, nt = 0.0;
        for (std::size_t b = 0; b < bands; ++b) {
            const double rv = r[px + n * b];
            const double tv = t[px + n * b];
            dot += rv * tv;
            nr += rv * rv;
            nt += tv * tv;
        }
        const double norm = std::sqrt(nr) * std::sqrt(nt);
        if (std::sqrt(nr) < 1e-12 || std::sqrt(nt) < 1e-12) continue;
        acc += std::acos(std::clamp(dot / norm, -1.0, 1.0));
        ++used;
    }
    if (used == 0) throw EmptyMaskError("all pixels skipped: spectral norms below 1e-12");
    return acc / static_cast<double>(used);
}

double sam_degrees(const Image& ref, const Image& test) {
    return sam_radians(ref, test) * 180.0 / std::numbers::pi;
}

double ergas(const Image& ref, const Image& test, double scale_ratio) {
    check_pair(ref, test);
    if (ref.tensor.order() != 3)
        throw std::invalid_argument("ergas needs an H x W x B image");
    if (!(scale_ratio > 0.0)) throw std::invalid_argument("scale ratio must be positive");
    const std::size_t n = ref.height() * ref.width();
    const std::size_t bands = ref.depth();
    const double* r = ref.tensor.data();
    const double* t = test.tensor.data();
    double acc = 0.0;
    for (std::size_t b = 0; b < bands; ++b) {
        double mean = 0.0, sq = 0.0;
        for (std::size_t px = 0; px < n; ++px) {
            const double rv = r[px + n * b];
            const double d = rv - t[px + n * b];
            mean += rv;
            sq += d * d;
        }
        mean /= static_cast<double>(n);
        if (mean == 0.0) {
            std::ostringstream os;
            os << "reference band " << b << " has zero mean; ergas undefined";
            throw DataError(os.str());
        }
        const double rmse = std::sqrt(sq / static_cast<double>(n));
        acc += (rmse / mean) * (rmse / mean);
    }
    return 100.0 * scale_ratio * std::sqrt(acc / static_cast<double>(bands));
}

MetricsReport evaluate(const Image& ref, const Image& test, bool foreground) {
    check_pair(ref, test);
    MetricsReport rep;
    const double peak = ref.peak;
    if (ref.layout == ImageLayout::Video) {
        double psnr_acc = 0.0, ssim_acc = 0.0;
        for (std::size_t f = 0; f < ref.frames(); ++f) {
            const Image rf = video_frame(ref, f);
            const Image tf = video_frame(test, f);
            FrameMetrics fm;
            fm.psnr = foreground ? psnr_foreground(rf, tf, peak) : psnr(rf, tf, peak);
            fm.ssim = ssim(rf, tf, peak);
            psnr_acc += fm.psnr;
            ssim_acc += fm.ssim;
            rep.per_frame.push_back(fm);
        }
        rep.psnr = psnr_acc / static_cast<double>(ref.frames());
        rep.ssim = ssim_acc / static_cast<double>(ref.frames());
        return rep;
    }
    rep.psnr = foreground ? psnr_foreground(ref, test, peak) : psnr(ref, test, peak);
    rep.ssim = ssim(ref, test, peak);
    if (ref.layout == ImageLayout::Multiband && ref.depth() >= 2) {
        rep.sam_radians = sam_radians(ref, test);
        rep.sam_degrees = *rep.sam_radians * 180.0 / std::numbers::pi;
        rep.ergas = ergas(ref, test);
    }
    return rep;
}

}  // namespace nlss
