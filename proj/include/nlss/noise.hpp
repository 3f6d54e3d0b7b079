#pragma once

#include "nlss/image.hpp"

#include <cstdint>
#include <functional>
#include <utility>

namespace nlss {

enum class NoiseKind { Awgn, Rician };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Awgn;
    double sigma = 0.0;  // intensity units of the target image
    std::uint64_t seed = 0;
};

namespace rng {

// Counter-based generator: every draw is a pure function of
// (seed, flat voxel index, stream), so parallel generation is
// order-independent and reruns are bit-identical.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);

// Uniform in the open interval (0, 1).
double to_unit(std::uint64_t h);

// Two independent standard normals for one (seed, index, stream) triple.
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index,
                                      std::uint64_t stream);

}  // namespace rng

// y = x + n with n iid N(0, sigma^2).  Output is unclipped, full precision.
Image add_awgn(const Image& x, const NoiseSpec& spec);

// y = sqrt((x + sigma*n1)^2 + (sigma*n2)^2) with independent standard
// normals n1, n2.  Input voxels must be non-negative.
Image add_rician(const Image& x, const NoiseSpec& spec);

Image add_noise(const Image& x, const NoiseSpec& spec);

using GaussianDenoiser = std::function<Image(const Image&, double sigma)>;

// Stabilizer pair for running a Gaussian denoiser on Rician data: forward
// maps the noisy volume into a Gaussian-like domain and reports the
// stabilized sigma; inverse maps the denoiser output back.  The default pair
// keeps the data as-is (stabilized sigma = sigma) and inverts through the
// second-moment relation E[Y^2] = X^2 + 2 sigma^2, i.e.
// x = sqrt(max(d^2 - 2 sigma^2, 0)) per voxel.
struct VstPair {
    std::function<std::pair<Image, double>(const Image&, double)> forward;
    std::function<Image(const Image&, double)> inverse;

    static VstPair second_moment();
};

Image vst_denoise(const Image& y, double sigma, const GaussianDenoiser& denoiser,
                  const VstPair& vst = VstPair::second_moment());

}  // namespace nlss
