#pragma once

#include "nlss/image.hpp"
#include "nlss/noise.hpp"
#include "nlss/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nlss {

enum class DatasetKind { ColorImage, ColorVideo, Msi, MriVolume };

ImageLayout dataset_layout(DatasetKind kind);
const char* dataset_name(DatasetKind kind);

struct ExperimentConfig {
    // With a NoiseSpec, inputs are clean references and noise is simulated;
    // without one, inputs are already noisy and `references` supplies the
    // clean counterpart for each (by position).
    std::vector<std::string> inputs;
    std::vector<std::string> references;
    DatasetKind kind = DatasetKind::ColorImage;
    std::optional<NoiseSpec> noise;
    bool use_filter = true;  // false -> score the noisy input itself
    FilterConfig filter;
    std::optional<double> filter_sigma;  // working sigma override
    std::vector<double> sigma_sweep;
    double peak = 255.0;
    bool vst = false;
    std::optional<double> resize_scale;
    bool foreground = false;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

// key = value lines, '#' comments; unknown keys are rejected.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// One CSV row per input:
//   file,sigma,filter,params_hash,psnr,ssim,sam,ergas,wall_time_seconds,error
// Per-file failures land in the error column and the run continues.  Given a
// fixed seed every cell except wall_time_seconds is reproducible.
std::string run_experiment(const ExperimentConfig& cfg);

// Robustness curve: the configured denoiser run across cfg.sigma_sweep on
// fixed noisy inputs.  Rows are file,sigma,psnr,ssim.
std::string sigma_sweep(const ExperimentConfig& cfg);

// Per-pixel mean in full precision; a dims mismatch names the offending
// entry of `names`.
Image average_images(const std::vector<Image>& images,
                     const std::vector<std::string>& names);

std::string format_float(double v);  // %.6g; infinities serialize as "inf"/"-inf"
std::string csv_escape(const std::string& s);
std::uint64_t fnv1a64(const std::string& s);

// Digest of everything that shapes a run except noise levels, paths and the
// seed; lets rows from different sweeps be grouped by configuration.
std::string params_hash(const ExperimentConfig& cfg);

}  // namespace nlss
