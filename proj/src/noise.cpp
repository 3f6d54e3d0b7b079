#include "nlss/noise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nlss {

namespace rng {

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 33;
    z *= 0xff51afd7ed558ccdULL;
    z ^= z >> 33;
    z *= 0xc4ceb9fe1a85ec53ULL;
    z ^= z >> 33;
    return z;
}

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
    std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
    h = mix64(h ^ (index * 0xbf58476d1ce4e5b9ULL + 0x2545f4914f6cdd1dULL));
    h = mix64(h ^ (stream * 0x94d049bb133111ebULL + 0xd6e8feb86659fd93ULL));
    return h;
}

double to_unit(std::uint64_t h) {
    // 52 high bits, offset by half a step: strictly inside (0, 1).  With 53
    // bits the +0.5 at the top of the range is not representable and rounds
    // the result up to exactly 1.0.
    return (static_cast<double>(h >> 12) + 0.5) * 0x1.0p-52;
}

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index,
                                      std::uint64_t stream) {
    const double u1 = to_unit(counter_hash(seed, index, 2 * stream));
    const double u2 = to_unit(counter_hash(seed, index, 2 * stream + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace rng

Image add_awgn(const Image& x, const NoiseSpec& spec) {
    if (spec.kind != NoiseKind::Awgn) {
        throw std::invalid_argument("add_awgn: spec kind is not awgn");
    }
    if (spec.sigma < 0.0) {
        throw std::invalid_argument("add_awgn: sigma must be >= 0");
    }
    Image y = x;
    if (spec.sigma == 0.0) {
        return y;
    }
    double* v = y.tensor.data();
    const std::size_t n = y.tensor.size();
    for (std::size_t i = 0; i < n; ++i) {
        v[i] += spec.sigma * rng::normal_pair(spec.seed, i, 0).first;
    }
    return y;
}

Image add_rician(const Image& x, const NoiseSpec& spec) {
    if (spec.kind != NoiseKind::Rician) {
        throw std::invalid_argument("add_rician: spec kind is not rician");
    }
    if (spec.sigma < 0.0) {
        throw std::invalid_argument("add_rician: sigma must be >= 0");
    }
    const double* src = x.tensor.data();
    const std::size_t n = x.tensor.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (src[i] < 0.0) {
            throw std::invalid_argument("add_rician: input voxel " + std::to_string(i) +
                                        " is negative");
        }
    }
    Image y = x;
    if (spec.sigma == 0.0) {
        return y;
    }
    double* v = y.tensor.data();
    for (std::size_t i = 0; i < n; ++i) {
        const auto [n1, n2] = rng::normal_pair(spec.seed, i, 0);
        const double re = v[i] + spec.sigma * n1;
        const double im = spec.sigma * n2;
        v[i] = std::sqrt(re * re + im * im);
    }
    return y;
}

Image add_noise(const Image& x, const NoiseSpec& spec) {
    return spec.kind == NoiseKind::Awgn ? add_awgn(x, spec) : add_rician(x, spec);
}

VstPair VstPair::second_moment() {
    VstPair p;
    p.forward = [](const Image& y, double sigma) { return std::make_pair(y, sigma); };
    p.inverse = [](const Image& d, double sigma) {
        Image out = d;
        double* v = out.tensor.data();
        const double bias = 2.0 * sigma * sigma;
        for (std::size_t i = 0; i < out.tensor.size(); ++i) {
            const double m2 = v[i] * v[i] - bias;
            v[i] = m2 > 0.0 ? std::sqrt(m2) : 0.0;
        }
        return out;
    };
    return p;
}

Image vst_denoise(const Image& y, double sigma, const GaussianDenoiser& denoiser,
                  const VstPair& vst) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("vst_denoise: sigma must be > 0");
    }
    auto [stabilized, sigma_vst] = vst.forward(y, sigma);
    Image denoised = denoiser(stabilized, sigma_vst);
    return vst.inverse(denoised, sigma);
}

}  // namespace nlss
