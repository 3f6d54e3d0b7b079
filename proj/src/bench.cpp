#include "nlss/bench.hpp"

#include "nlss/errors.hpp"
#include "nlss/io.hpp"
#include "nlss/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlss {

ImageLayout dataset_layout(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::ColorImage: return ImageLayout::Color;
        case DatasetKind::ColorVideo: return ImageLayout::Video;
        case DatasetKind::Msi: return ImageLayout::Multiband;
        case DatasetKind::MriVolume: return ImageLayout::Volume;
    }
    throw std::logic_error("unreachable dataset kind");
}

const char* dataset_name(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::ColorImage: return "color";
        case DatasetKind::ColorVideo: return "video";
        case DatasetKind::Msi: return "msi";
        case DatasetKind::MriVolume: return "mri";
    }
    return "unknown";
}

void ExperimentConfig::validate() const {
    filter.validate();
    if (!(peak > 0.0)) throw std::invalid_argument("peak must be positive");
    if (noise && noise->sigma < 0.0)
        throw std::invalid_argument("noise sigma must be >= 0");
    if (filter_sigma && *filter_sigma < 0.0)
        throw std::invalid_argument("filter_sigma must be >= 0");
    if (resize_scale && !(*resize_scale > 0.0 && *resize_scale < 1.0))
        throw std::invalid_argument("resize scale must lie in (0, 1)");
    if (!noise && references.size() != inputs.size())
        throw std::invalid_argument(
            "inputs without simulated noise need one clean reference each");
    if (noise && !references.empty() && references.size() != inputs.size())
        throw std::invalid_argument("reference count must match input count");
    for (std::size_t i = 0; i < sigma_sweep.size(); ++i) {
        if (!(sigma_sweep[i] > 0.0))
            throw std::invalid_argument("sweep sigmas must be positive");
        if (i > 0 && !(sigma_sweep[i] > sigma_sweep[i - 1]))
            throw std::invalid_argument("sweep sigmas must be strictly increasing");
    }
}

std::string format_float(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string params_hash(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "kind=" << dataset_name(cfg.kind)
       << ";filter=" << (cfg.use_filter ? filter_name(cfg.filter.filter) : "none")
       << ";ps=" << cfg.filter.patch_size << ";step=" << cfg.filter.step
       << ";radius=" << cfg.filter.search_radius << ";k=" << cfg.filter.k_similar
       << ";tau=" << format_float(cfg.filter.tau_factor) << ";multirank=";
    for (std::size_t i = 0; i < cfg.filter.multirank.size(); ++i)
        os << (i ? "," : "") << cfg.filter.multirank[i];
    os << ";lambda=" << format_float(cfg.filter.lambda_addback)
       << ";iters=" << cfg.filter.iterations
       << ";temporal_radius=" << cfg.filter.temporal_radius
       << ";vst=" << (cfg.vst ? 1 : 0)
       << ";resize=" << (cfg.resize_scale ? format_float(*cfg.resize_scale) : "")
       << ";foreground=" << (cfg.foreground ? 1 : 0)
       << ";peak=" << format_float(cfg.peak);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(os.str())));
    return buf;
}

namespace {

struct LoadedPair {
    Image clean;
    Image noisy;
};

LoadedPair load_pair(const ExperimentConfig& cfg, std::size_t index) {
    const ImageLayout hint = dataset_layout(cfg.kind);
    LoadedPair p{load_image(cfg.inputs[index], hint, cfg.peak), Image{}};
    if (cfg.noise) {
        NoiseSpec spec = *cfg.noise;
        spec.seed = rng::counter_hash(cfg.seed, index, 0x66696c65ULL);  // per-file seed
        p.noisy = add_noise(p.clean, spec);
        if (!cfg.references.empty())
            p.clean = load_image(cfg.references[index], hint, cfg.peak);
    } else {
        p.noisy = p.clean;
        p.clean = load_image(cfg.references[index], hint, cfg.peak);
    }
    return p;
}

Image run_filter(const Image& noisy, double sigma, const ExperimentConfig& cfg) {
    FilterConfig fc = cfg.filter;
    const GaussianDenoiser base = [&cfg, &fc](const Image& im, double s) {
        FilterConfig f2 = fc;
        f2.sigma = s;
        return cfg.resize_scale ? resize_denoise(im, *cfg.resize_scale, f2)
                                : denoise(im, f2);
    };
    if (cfg.vst) return vst_denoise(noisy, sigma, base);
    return base(noisy, sigma);
}

double working_sigma(const ExperimentConfig& cfg) {
    if (cfg.filter_sigma) return *cfg.filter_sigma;
    if (cfg.noise) return cfg.noise->sigma;
    return cfg.filter.sigma;
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::ostringstream csv;
    csv << "file,sigma,filter,params_hash,psnr,ssim,sam,ergas,wall_time_seconds,error\n";
    const std::string hash = params_hash(cfg);
    const std::string fname = cfg.use_filter ? filter_name(cfg.filter.filter) : "none";
    for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
        const double sigma = cfg.noise ? cfg.noise->sigma : working_sigma(cfg);
        csv << csv_escape(cfg.inputs[i]) << ',' << format_float(sigma) << ',' << fname
            << ',' << hash << ',';
        try {
            const LoadedPair p = load_pair(cfg, i);
            const auto t0 = std::chrono::steady_clock::now();
            const Image result =
                cfg.use_filter ? run_filter(p.noisy, working_sigma(cfg), cfg) : p.noisy;
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            const MetricsReport rep = evaluate(p.clean, result, cfg.foreground);
            csv << format_float(rep.psnr) << ',' << format_float(rep.ssim) << ','
                << (rep.sam_degrees ? format_float(*rep.sam_degrees) : "") << ','
                << (rep.ergas ? format_float(*rep.ergas) : "") << ','
                << format_float(wall) << ",\n";
        } catch (const std::exception& e) {
            csv << ",,,,," << csv_escape(e.what()) << "\n";
        }
    }
    return csv.str();
}

std::string sigma_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.sigma_sweep.empty())
        throw std::invalid_argument("sigma sweep list must not be empty");
    std::ostringstream csv;
    csv << "file,sigma,psnr,ssim\n";
    for (std::size_t i = 0; i < cfg.inputs.size(); ++i) {
        LoadedPair p;
        try {
            p = load_pair(cfg, i);
        } catch (const std::exception& e) {
            for (double s : cfg.sigma_sweep)
                csv << csv_escape(cfg.inputs[i]) << ',' << format_float(s) << ",,"
                    << csv_escape(e.what()) << "\n";
            continue;
        }
        for (double s : cfg.sigma_sweep) {
            csv << csv_escape(cfg.inputs[i]) << ',' << format_float(s) << ',';
            try {
                const Image result = run_filter(p.noisy, s, cfg);
                const MetricsReport rep = evaluate(p.clean, result, cfg.foreground);
                csv << format_float(rep.psnr) << ',' << format_float(rep.ssim) << "\n";
            } catch (const std::exception& e) {
                csv << ',' << csv_escape(e.what()) << "\n";
            }
        }
    }
    return csv.str();
}

Image average_images(const std::vector<Image>& images,
                     const std::vector<std::string>& names) {
    if (images.empty()) throw std::invalid_argument("need at least one image to average");
    const Image& first = images.front();
    Tensor acc(first.tensor.dims());
    for (std::size_t n = 0; n < images.size(); ++n) {
        const Image& im = images[n];
        if (!im.tensor.same_dims(first.tensor) || im.layout != first.layout) {
            const std::string who = n < names.size() ? names[n] : std::to_string(n);
            std::ostringstream os;
            os << "dimension mismatch at '" << who << "': expected extents (";
            for (std::size_t a = 0; a < first.tensor.order(); ++a)
                os << (a ? ", " : "") << first.tensor.dim(a);
            os << "), got (";
            for (std::size_t a = 0; a < im.tensor.order(); ++a)
                os << (a ? ", " : "") << im.tensor.dim(a);
            os << ")";
            throw DataError(os.str());
        }
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += im.tensor[i];
    }
    const double inv = 1.0 / static_cast<double>(images.size());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= inv;
    return make_image(std::move(acc), first.layout, first.peak);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& origin, const std::string& key,
                            const std::string& value) {
    throw DataError(origin + ": bad value '" + value + "' for key '" + key + "'");
}

double to_double(const std::string& origin, const std::string& key,
                 const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) bad_value(origin, key, v);
        return d;
    } catch (const DataError&) {
        throw;
    } catch (...) {
        bad_value(origin, key, v);
    }
}

std::size_t to_size(const std::string& origin, const std::string& key,
                    const std::string& v) {
    try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used != v.size() || n < 0) bad_value(origin, key, v);
        return static_cast<std::size_t>(n);
    } catch (const DataError&) {
        throw;
    } catch (...) {
        bad_value(origin, key, v);
    }
}

bool to_bool(const std::string& origin, const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    bad_value(origin, key, v);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::string noise_kind = "none";
    double noise_sigma = 0.0;

    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        std::ostringstream where;
        where << origin << ":" << lineno;
        if (eq == std::string::npos)
            throw DataError(where.str() + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string at = where.str();

        if (key == "input") {
            cfg.inputs.push_back(value);
        } else if (key == "reference") {
            cfg.references.push_back(value);
        } else if (key == "kind") {
            if (value == "color") cfg.kind = DatasetKind::ColorImage;
            else if (value == "video") cfg.kind = DatasetKind::ColorVideo;
            else if (value == "msi") cfg.kind = DatasetKind::Msi;
            else if (value == "mri") cfg.kind = DatasetKind::MriVolume;
            else bad_value(at, key, value);
        } else if (key == "noise") {
            if (value != "awgn" && value != "rician" && value != "none")
                bad_value(at, key, value);
            noise_kind = value;
        } else if (key == "sigma") {
            noise_sigma = to_double(at, key, value);
        } else if (key == "seed") {
            try {
                std::size_t used = 0;
                cfg.seed = std::stoull(value, &used);
                if (used != value.size()) bad_value(at, key, value);
            } catch (const DataError&) {
                throw;
            } catch (...) {
                bad_value(at, key, value);
            }
        } else if (key == "filter") {
            if (value == "none") cfg.use_filter = false;
            else if (value == "msvd") cfg.filter.filter = FilterKind::MSvd;
            else if (value == "hosvd-ht") cfg.filter.filter = FilterKind::HosvdHard;
            else if (value == "hosvd-trunc") cfg.filter.filter = FilterKind::HosvdTruncate;
            else bad_value(at, key, value);
        } else if (key == "filter_sigma") {
            cfg.filter_sigma = to_double(at, key, value);
        } else if (key == "ps") {
            cfg.filter.patch_size = to_size(at, key, value);
        } else if (key == "step") {
            cfg.filter.step = to_size(at, key, value);
        } else if (key == "radius") {
            cfg.filter.search_radius = to_size(at, key, value);
        } else if (key == "k") {
            cfg.filter.k_similar = to_size(at, key, value);
        } else if (key == "tau_factor") {
            cfg.filter.tau_factor = to_double(at, key, value);
        } else if (key == "multirank") {
            cfg.filter.multirank.clear();
            for (const std::string& item : split_list(value))
                cfg.filter.multirank.push_back(to_size(at, key, item));
        } else if (key == "lambda") {
            cfg.filter.lambda_addback = to_double(at, key, value);
        } else if (key == "iters") {
            cfg.filter.iterations = to_size(at, key, value);
        } else if (key == "temporal_radius") {
            cfg.filter.temporal_radius = to_size(at, key, value);
        } else if (key == "sweep") {
            cfg.sigma_sweep.clear();
            for (const std::string& item : split_list(value))
                cfg.sigma_sweep.push_back(to_double(at, key, item));
        } else if (key == "peak") {
            cfg.peak = to_double(at, key, value);
        } else if (key == "vst") {
            cfg.vst = to_bool(at, key, value);
        } else if (key == "resize") {
            cfg.resize_scale = to_double(at, key, value);
        } else if (key == "foreground") {
            cfg.foreground = to_bool(at, key, value);
        } else {
            throw DataError(at + ": unknown config key '" + key + "'");
        }
    }

    if (noise_kind != "none") {
        NoiseSpec spec;
        spec.kind = noise_kind == "awgn" ? NoiseKind::Awgn : NoiseKind::Rician;
        spec.sigma = noise_sigma;
        spec.seed = cfg.seed;
        cfg.noise = spec;
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError(path + ": cannot open for reading");
    std::ostringstream os;
    os << f.rdbuf();
    return parse_config_text(os.str(), path);
}

}  // namespace nlss
