// Command-line front end: noise simulation, denoising, ground-truth
// averaging, metric evaluation and CSV benchmark reports.

#include "nlss/bench.hpp"
#include "nlss/errors.hpp"
#include "nlss/io.hpp"
#include "nlss/metrics.hpp"
#include "nlss/noise.hpp"
#include "nlss/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

std::optional<nlss::ImageLayout> layout_hint(const std::string& data) {
    if (data.empty()) return std::nullopt;
    const auto hint = nlss::parse_layout_name(data);
    if (!hint) throw std::invalid_argument("unknown --data value '" + data + "'");
    return hint;
}

nlss::FilterKind parse_filter(const std::string& name) {
    if (name == "msvd") return nlss::FilterKind::MSvd;
    if (name == "hosvd-ht") return nlss::FilterKind::HosvdHard;
    if (name == "hosvd-trunc") return nlss::FilterKind::HosvdTruncate;
    throw std::invalid_argument("unknown filter '" + name + "'");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw nlss::DataError(path + ": cannot open for writing");
    f << text;
    if (!f) throw nlss::DataError(path + ": write failed");
}

std::string partial_path(const std::string& out, std::size_t n) {
    const std::filesystem::path p(out);
    std::filesystem::path q = p.parent_path() / p.stem();
    q += "_mean" + std::to_string(n);
    q += p.extension();
    return q.string();
}

void print_report(const nlss::MetricsReport& rep) {
    std::cout << "psnr=" << nlss::format_float(rep.psnr) << "\n";
    std::cout << "ssim=" << nlss::format_float(rep.ssim) << "\n";
    if (rep.sam_degrees)
        std::cout << "sam_degrees=" << nlss::format_float(*rep.sam_degrees) << "\n";
    if (rep.sam_radians)
        std::cout << "sam_radians=" << nlss::format_float(*rep.sam_radians) << "\n";
    if (rep.ergas) std::cout << "ergas=" << nlss::format_float(*rep.ergas) << "\n";
    for (std::size_t f = 0; f < rep.per_frame.size(); ++f)
        std::cout << "frame_" << f << "=psnr:" << nlss::format_float(rep.per_frame[f].psnr)
                  << ",ssim:" << nlss::format_float(rep.per_frame[f].ssim) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlocal self-similarity denoising toolkit"};
    app.require_subcommand(1);

    std::string data_kind, in_path, out_path, noise_kind = "awgn";
    double sigma = 0.0, peak = 255.0, lambda = 0.0, tau_factor = 2.7, resize = 0.0;
    std::uint64_t seed = 0;
    std::string filter = "msvd";
    std::size_t ps = 8, step = 4, radius = 19, k = 32, iters = 1, temporal = 2;
    std::vector<std::size_t> multirank;
    bool vst = false, foreground = false;
    std::vector<std::string> in_paths;
    std::vector<std::size_t> partial;
    std::string config_path, csv_out;
    std::vector<double> sigmas;

    CLI::App* sim = app.add_subcommand("simulate", "corrupt a clean image with noise");
    sim->add_option("--kind", noise_kind, "awgn or rician")
        ->check(CLI::IsMember({"awgn", "rician"}));
    sim->add_option("--sigma", sigma, "noise standard deviation")->required();
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--data", data_kind, "layout: gray|color|msi|mri|video");
    sim->add_option("--peak", peak, "intensity peak");
    sim->add_option("in", in_path, "clean input")->required();
    sim->add_option("out", out_path, "noisy output")->required();

    CLI::App* den = app.add_subcommand("denoise", "run a collaborative filter");
    den->add_option("--filter", filter, "msvd|hosvd-ht|hosvd-trunc")
        ->check(CLI::IsMember({"msvd", "hosvd-ht", "hosvd-trunc"}));
    den->add_option("--sigma", sigma, "noise standard deviation")->required();
    den->add_option("--ps", ps, "patch size");
    den->add_option("--step", step, "reference grid stride");
    den->add_option("--radius", radius, "search window half-width");
    den->add_option("--k", k, "similar patches per group");
    den->add_option("--tau-factor", tau_factor, "threshold = tau-factor * sigma");
    den->add_option("--multirank", multirank, "per-mode ranks, e.g. 2,2")->delimiter(',');
    den->add_option("--lambda", lambda, "noisy add-back weight in [0,1]");
    den->add_option("--iters", iters, "denoising passes");
    den->add_option("--temporal-radius", temporal, "frame/slice search half-window");
    den->add_option("--resize", resize, "downscale factor in (0,1) before filtering");
    den->add_flag("--vst", vst, "stabilize Rician noise before filtering");
    den->add_option("--data", data_kind, "layout: gray|color|msi|mri|video");
    den->add_option("--peak", peak, "intensity peak");
    den->add_option("in", in_path, "noisy input")->required();
    den->add_option("out", out_path, "denoised output")->required();

    CLI::App* avg = app.add_subcommand("average", "per-pixel mean of aligned captures");
    avg->add_option("--partial", partial, "also emit means over the first N inputs")
        ->delimiter(',');
    avg->add_option("--data", data_kind, "layout: gray|color|msi|mri|video");
    avg->add_option("--peak", peak, "intensity peak");
    avg->add_option("out", out_path, "mean image output")->required();
    avg->add_option("inputs", in_paths, "aligned captures")->required()->expected(-1);

    CLI::App* ev = app.add_subcommand("evaluate", "score a result against a reference");
    ev->add_option("--peak", peak, "intensity peak")->required();
    ev->add_flag("--foreground", foreground, "restrict PSNR to bright reference voxels");
    ev->add_option("--data", data_kind, "layout: gray|color|msi|mri|video");
    ev->add_option("ref", in_path, "clean reference")->required();
    ev->add_option("test", out_path, "image under test")->required();

    CLI::App* bench = app.add_subcommand("bench", "run a configured experiment");
    bench->add_option("--config", config_path, "key = value experiment file")->required();
    bench->add_option("--out", csv_out, "CSV report path")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "denoiser robustness across sigmas");
    sweep->add_option("--config", config_path, "key = value experiment file")->required();
    sweep->add_option("--sigmas", sigmas, "sweep values, e.g. 10,15,20")->delimiter(',');
    sweep->add_option("--out", csv_out, "CSV curve path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto hint = layout_hint(data_kind);
        if (sim->parsed()) {
            nlss::NoiseSpec spec;
            spec.kind = noise_kind == "rician" ? nlss::NoiseKind::Rician
                                               : nlss::NoiseKind::Awgn;
            spec.sigma = sigma;
            spec.seed = seed;
            nlss::save_image(nlss::add_noise(nlss::load_image(in_path, hint, peak), spec),
                             out_path);
        } else if (den->parsed()) {
            nlss::FilterConfig fc;
            fc.filter = parse_filter(filter);
            fc.patch_size = ps;
            fc.step = step;
            fc.search_radius = radius;
            fc.k_similar = k;
            fc.tau_factor = tau_factor;
            fc.multirank = multirank;
            fc.lambda_addback = lambda;
            fc.iterations = iters;
            fc.temporal_radius = temporal;
            fc.sigma = sigma;
            const nlss::Image y = nlss::load_image(in_path, hint, peak);
            const nlss::GaussianDenoiser base = [&](const nlss::Image& im, double s) {
                nlss::FilterConfig f2 = fc;
                f2.sigma = s;
                return resize > 0.0 ? nlss::resize_denoise(im, resize, f2)
                                    : nlss::denoise(im, f2);
            };
            const nlss::Image result =
                vst ? nlss::vst_denoise(y, fc.sigma, base) : base(y, fc.sigma);
            nlss::save_image(result, out_path);
        } else if (avg->parsed()) {
            std::vector<nlss::Image> images;
            images.reserve(in_paths.size());
            for (const std::string& p : in_paths)
                images.push_back(nlss::load_image(p, hint, peak));
            nlss::save_image(nlss::average_images(images, in_paths), out_path);
            for (std::size_t n : partial) {
                if (n < 1 || n > images.size())
                    throw std::invalid_argument("--partial count " + std::to_string(n) +
                                                " exceeds the input count");
                const std::vector<nlss::Image> head(images.begin(), images.begin() + n);
                const std::vector<std::string> head_names(in_paths.begin(),
                                                          in_paths.begin() + n);
                nlss::save_image(nlss::average_images(head, head_names),
                                 partial_path(out_path, n));
            }
        } else if (ev->parsed()) {
            const nlss::Image ref = nlss::load_image(in_path, hint, peak);
            const nlss::Image test = nlss::load_image(out_path, hint, peak);
            print_report(nlss::evaluate(ref, test, foreground));
        } else if (bench->parsed()) {
            const nlss::ExperimentConfig cfg = nlss::parse_config_file(config_path);
            write_text(csv_out, cfg.sigma_sweep.empty() ? nlss::run_experiment(cfg)
                                                        : nlss::sigma_sweep(cfg));
        } else if (sweep->parsed()) {
            nlss::ExperimentConfig cfg = nlss::parse_config_file(config_path);
            if (!sigmas.empty()) cfg.sigma_sweep = sigmas;
            write_text(csv_out, nlss::sigma_sweep(cfg));
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
