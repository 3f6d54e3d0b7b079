#pragma once

#include "nlss/image.hpp"

#include <optional>
#include <vector>

namespace nlss {

struct FrameMetrics {
    double psnr = 0.0;
    double ssim = 0.0;
};

// sam/ergas are present for multiband data only; per_frame is filled for
// video, whose top-level psnr/ssim are the per-frame means.
struct MetricsReport {
    double psnr = 0.0;
    double ssim = 0.0;
    std::optional<double> sam_degrees;
    std::optional<double> sam_radians;
    std::optional<double> ergas;
    std::vector<FrameMetrics> per_frame;
};

// 10*log10(peak^2 / MSE); +infinity when the images are identical.
double psnr(const Image& ref, const Image& test, double peak);

// PSNR restricted to voxels where the clean reference exceeds 10*peak/255.
// Throws EmptyMaskError when nothing qualifies.
double psnr_foreground(const Image& ref, const Image& test, double peak);

// Mean local structural similarity, 11x11 Gaussian window (std 1.5), valid
// region only, C1=(0.01*peak)^2, C2=(0.03*peak)^2.  Multi-channel data is
// scored per channel and averaged; video per frame and averaged.
double ssim(const Image& ref, const Image& test, double peak);

// Mean per-pixel angle between spectral vectors; pixels where either vector
// norm is < 1e-12 are skipped (EmptyMaskError if none remain).
double sam_radians(const Image& ref, const Image& test);
double sam_degrees(const Image& ref, const Image& test);

// 100 * scale_ratio * sqrt(mean_b (RMSE_b / mean_b)^2); a zero reference
// band mean raises DataError naming the band.
double ergas(const Image& ref, const Image& test, double scale_ratio = 1.0);

MetricsReport evaluate(const Image& ref, const Image& test, bool foreground = false);

}  // namespace nlss
