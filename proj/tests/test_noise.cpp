#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "nlss/noise.hpp"

#include "testutil.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

using nlss::Image;
using nlss::ImageLayout;
using nlss::NoiseKind;
using nlss::NoiseSpec;
using nlss::Tensor;

namespace {

Image constant_image(std::size_t h, std::size_t w, double value) {
    Tensor t({h, w});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = value;
    return nlss::make_image(std::move(t), ImageLayout::Gray);
}

}  // namespace

TEST_CASE("counter hash is pure and sensitive to every argument") {
    const auto h = nlss::rng::counter_hash(1, 2, 3);
    CHECK(h == nlss::rng::counter_hash(1, 2, 3));
    CHECK(h != nlss::rng::counter_hash(2, 2, 3));
    CHECK(h != nlss::rng::counter_hash(1, 3, 3));
    CHECK(h != nlss::rng::counter_hash(1, 2, 4));
}

TEST_CASE("to_unit lands strictly inside (0,1)") {
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = nlss::rng::to_unit(nlss::rng::counter_hash(9, i, 0));
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    CHECK(nlss::rng::to_unit(0) > 0.0);
    CHECK(nlss::rng::to_unit(~0ULL) < 1.0);
}

TEST_CASE("normal pair moments over a million draws") {
    const std::size_t n = 500000;  // pairs -> 1e6 normals
    double sum = 0.0, sumsq = 0.0;
    std::size_t within1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [a, b] = nlss::rng::normal_pair(123, i, 0);
        sum += a + b;
        sumsq += a * a + b * b;
        within1 += (std::abs(a) < 1.0) + (std::abs(b) < 1.0);
    }
    const double mean = sum / (2.0 * n);
    const double var = sumsq / (2.0 * n) - mean * mean;
    CHECK(std::abs(mean) < 0.005);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 0.01);
    const double frac = static_cast<double>(within1) / (2.0 * n);
    CHECK(std::abs(frac - 0.682689) < 0.005);
}

TEST_CASE("awgn is seeded, reproducible and correctly scaled") {
    const Image x = testutil::random_image({64, 64, 3}, ImageLayout::Color, 5);
    NoiseSpec spec{NoiseKind::Awgn, 20.0, 42};
    const Image y1 = nlss::add_awgn(x, spec);
    const Image y2 = nlss::add_awgn(x, spec);
    CHECK(testutil::max_abs_diff(y1.tensor, y2.tensor) == 0.0);

    spec.seed = 43;
    const Image y3 = nlss::add_awgn(x, spec);
    CHECK(testutil::max_abs_diff(y1.tensor, y3.tensor) > 0.0);

    const Image big = constant_image(512, 512, 100.0);
    const Image noisy = nlss::add_awgn(big, {NoiseKind::Awgn, 30.0, 7});
    CHECK(std::abs(testutil::sample_std(noisy.tensor, big.tensor) - 30.0) < 0.3);

    const Image same = nlss::add_awgn(x, {NoiseKind::Awgn, 0.0, 1});
    CHECK(testutil::max_abs_diff(same.tensor, x.tensor) == 0.0);
}

TEST_CASE("rician magnitudes: nonnegative, rayleigh at zero, gaussian-like far out") {
    const double sigma = 5.0;
    const Image zero = constant_image(1024, 1024, 0.0);
    const Image rz = nlss::add_rician(zero, {NoiseKind::Rician, sigma, 11});
    double mean = 0.0;
    for (std::size_t i = 0; i < rz.tensor.size(); ++i) {
        CHECK(rz.tensor[i] >= 0.0);
        mean += rz.tensor[i];
    }
    mean /= static_cast<double>(rz.tensor.size());
    const double rayleigh = sigma * std::sqrt(std::numbers::pi / 2.0);
    CHECK(std::abs(mean - rayleigh) / rayleigh < 0.01);

    const Image far = constant_image(1024, 1024, 1000.0 * sigma);
    const Image rf = nlss::add_rician(far, {NoiseKind::Rician, sigma, 12});
    CHECK(std::abs(testutil::sample_std(rf.tensor, far.tensor) - sigma) / sigma < 0.02);
}

TEST_CASE("rician rejects negative input intensities") {
    Image x = constant_image(4, 4, 1.0);
    x.tensor(2, 3) = -0.5;
    CHECK_THROWS_AS(nlss::add_rician(x, {NoiseKind::Rician, 1.0, 0}),
                    std::invalid_argument);
}

TEST_CASE("add_noise dispatches on the noise kind") {
    const Image x = constant_image(32, 32, 50.0);
    const Image a = nlss::add_noise(x, {NoiseKind::Awgn, 4.0, 3});
    const Image b = nlss::add_awgn(x, {NoiseKind::Awgn, 4.0, 3});
    CHECK(testutil::max_abs_diff(a.tensor, b.tensor) == 0.0);
    const Image c = nlss::add_noise(x, {NoiseKind::Rician, 4.0, 3});
    const Image d = nlss::add_rician(x, {NoiseKind::Rician, 4.0, 3});
    CHECK(testutil::max_abs_diff(c.tensor, d.tensor) == 0.0);
}

TEST_CASE("second-moment stabilizer inverts through sqrt(d^2 - 2 sigma^2)") {
    const auto vst = nlss::VstPair::second_moment();
    Image y = constant_image(2, 2, 10.0);
    const auto [fwd, s] = vst.forward(y, 2.0);
    CHECK(s == 2.0);
    CHECK(testutil::max_abs_diff(fwd.tensor, y.tensor) == 0.0);
    const Image inv = vst.inverse(y, 2.0);
    CHECK(inv.tensor[0] == doctest::Approx(std::sqrt(100.0 - 8.0)));
    const Image small = vst.inverse(constant_image(2, 2, 1.0), 2.0);
    CHECK(small.tensor[0] == 0.0);  // clamped at zero under the noise floor
}

TEST_CASE("vst_denoise with the identity denoiser applies only the inverse map") {
    const Image y = testutil::random_image({8, 8}, ImageLayout::Gray, 21, 5.0, 30.0);
    const double sigma = 3.0;
    const auto out = nlss::vst_denoise(
        y, sigma, [](const Image& im, double) { return im; });
    for (std::size_t i = 0; i < y.tensor.size(); ++i) {
        const double want =
            std::sqrt(std::max(y.tensor[i] * y.tensor[i] - 2.0 * sigma * sigma, 0.0));
        CHECK(out.tensor[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("global-mean denoiser under the stabilizer recovers a rician phantom") {
    const double a = 50.0, sigma = 5.0;
    const Image clean = constant_image(512, 512, a);
    const Image noisy = nlss::add_rician(clean, {NoiseKind::Rician, sigma, 99});
    const nlss::GaussianDenoiser mean_denoiser = [](const Image& im, double) {
        double m = 0.0;
        for (std::size_t i = 0; i < im.tensor.size(); ++i) m += im.tensor[i];
        m /= static_cast<double>(im.tensor.size());
        Image out = im;
        for (std::size_t i = 0; i < out.tensor.size(); ++i) out.tensor[i] = m;
        return out;
    };
    const Image rec = nlss::vst_denoise(noisy, sigma, mean_denoiser);
    CHECK(std::abs(rec.tensor[0] - a) / a < 0.01);
}

TEST_CASE("vst_denoise requires a positive sigma") {
    const Image y = constant_image(4, 4, 1.0);
    CHECK_THROWS_AS(nlss::vst_denoise(y, 0.0, [](const Image& im, double) { return im; }),
                    std::invalid_argument);
}
