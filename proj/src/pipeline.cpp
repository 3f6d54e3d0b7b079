#include "nlss/pipeline.hpp"

#include "nlss/errors.hpp"
#include "nlss/filters.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nlss {

const char* filter_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::MSvd: return "msvd";
        case FilterKind::HosvdHard: return "hosvd-ht";
        case FilterKind::HosvdTruncate: return "hosvd-trunc";
    }
    return "unknown";
}

void FilterConfig::validate() const {
    if (patch_size < 2) throw std::invalid_argument("patch_size must be >= 2");
    if (step < 1) throw std::invalid_argument("step must be >= 1");
    if (k_similar < 1) throw std::invalid_argument("k_similar must be >= 1");
    if (!(lambda_addback >= 0.0 && lambda_addback <= 1.0))
        throw std::invalid_argument("lambda_addback must lie in [0, 1]");
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    if (!(tau_factor >= 0.0)) throw std::invalid_argument("tau_factor must be >= 0");
    for (std::size_t r : multirank)
        if (r < 1) throw std::invalid_argument("multirank entries must be >= 1");
}

std::vector<std::size_t> grid_positions(std::size_t extent, std::size_t patch,
                                        std::size_t step) {
    if (patch < 1 || step < 1) throw std::invalid_argument("patch and step must be >= 1");
    if (patch > extent) {
        std::ostringstream os;
        os << "patch size " << patch << " exceeds axis extent " << extent;
        throw std::invalid_argument(os.str());
    }
    const std::size_t last = extent - patch;
    std::vector<std::size_t> pos;
    for (std::size_t p = 0; p < last; p += step) pos.push_back(p);
    pos.push_back(last);
    return pos;
}

std::vector<PatchOrigin> reference_grid(const Image& img, std::size_t patch_size,
                                        std::size_t step) {
    const auto rows = grid_positions(img.height(), patch_size, step);
    const auto cols = grid_positions(img.width(), patch_size, step);
    std::vector<PatchOrigin> refs;
    switch (img.layout) {
        case ImageLayout::Gray:
        case ImageLayout::Color:
        case ImageLayout::Multiband:
            refs.reserve(rows.size() * cols.size());
            for (std::size_t r : rows)
                for (std::size_t c : cols)
                    refs.push_back({static_cast<int>(r), static_cast<int>(c), 0});
            break;
        case ImageLayout::Volume: {
            const auto zs = grid_positions(img.depth(), patch_size, step);
            refs.reserve(rows.size() * cols.size() * zs.size());
            for (std::size_t z : zs)
                for (std::size_t r : rows)
                    for (std::size_t c : cols)
                        refs.push_back({static_cast<int>(r), static_cast<int>(c),
                                        static_cast<int>(z)});
            break;
        }
        case ImageLayout::Video:
            refs.reserve(rows.size() * cols.size() * img.frames());
            for (std::size_t f = 0; f < img.frames(); ++f)
                for (std::size_t r : rows)
                    for (std::size_t c : cols)
                        refs.push_back({static_cast<int>(r), static_cast<int>(c),
                                        static_cast<int>(f)});
            break;
    }
    return refs;
}

namespace {

// Single-channel surface the Euclidean patch distance is computed on.  Color,
// multiband and video data match on their channel/band sum; gray images match
// on themselves.  Volumes match on the raw voxels (cube against cube), so the
// plane stays empty for them.
struct MatchPlane {
    std::vector<double> data;  // h x w x slices, first-index-fastest
    std::size_t h = 0, w = 0, slices = 1;
    bool raw = false;

    double at(std::size_t r, std::size_t c, std::size_t s) const {
        return data[r + h * (c + w * s)];
    }
};

MatchPlane build_match_plane(const Image& img) {
    MatchPlane p;
    p.h = img.height();
    p.w = img.width();
    const Tensor& t = img.tensor;
    switch (img.layout) {
        case ImageLayout::Gray:
            p.data = t.values();
            break;
        case ImageLayout::Color:
        case ImageLayout::Multiband: {
            p.data.assign(p.h * p.w, 0.0);
            const std::size_t bands = img.depth();
            for (std::size_t b = 0; b < bands; ++b)
                for (std::size_t c = 0; c < p.w; ++c)
                    for (std::size_t r = 0; r < p.h; ++r)
                        p.data[r + p.h * c] += t(r, c, b);
            break;
        }
        case ImageLayout::Video: {
            p.slices = img.frames();
            p.data.assign(p.h * p.w * p.slices, 0.0);
            for (std::size_t f = 0; f < p.slices; ++f)
                for (std::size_t ch = 0; ch < 3; ++ch)
                    for (std::size_t c = 0; c < p.w; ++c)
                        for (std::size_t r = 0; r < p.h; ++r)
                            p.data[r + p.h * (c + p.w * f)] += t(r, c, ch, f);
            break;
        }
        case ImageLayout::Volume:
            p.raw = true;
            break;
    }
    return p;
}

double plane_distance2(const MatchPlane& p, std::size_t ps, const PatchOrigin& a,
                       const PatchOrigin& b) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < ps; ++j)
        for (std::size_t i = 0; i < ps; ++i) {
            const double d = p.at(a.row + i, a.col + j, a.slice) -
                             p.at(b.row + i, b.col + j, b.slice);
            d2 += d * d;
        }
    return d2;
}

double cube_distance2(const Tensor& t, std::size_t ps, const PatchOrigin& a,
                      const PatchOrigin& b) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < ps; ++k)
        for (std::size_t j = 0; j < ps; ++j)
            for (std::size_t i = 0; i < ps; ++i) {
                const double d = t(a.row + i, a.col + j, a.slice + k) -
                                 t(b.row + i, b.col + j, b.slice + k);
                d2 += d * d;
            }
    return d2;
}

Tensor extract_group(const Image& img, const std::vector<PatchOrigin>& origins,
                     std::size_t ps) {
    const Tensor& t = img.tensor;
    const std::size_t k = origins.size();
    switch (img.layout) {
        case ImageLayout::Gray: {
            Tensor g({ps, ps, k});
            for (std::size_t m = 0; m < k; ++m)
                for (std::size_t j = 0; j < ps; ++j)
                    for (std::size_t i = 0; i < ps; ++i)
                        g(i, j, m) = t(origins[m].row + i, origins[m].col + j);
            return g;
        }
        case ImageLayout::Color:
        case ImageLayout::Multiband: {
            const std::size_t bands = img.depth();
            Tensor g({ps, ps, bands, k});
            for (std::size_t m = 0; m < k; ++m)
                for (std::size_t b = 0; b < bands; ++b)
                    for (std::size_t j = 0; j < ps; ++j)
                        for (std::size_t i = 0; i < ps; ++i)
                            g(i, j, b, m) = t(origins[m].row + i, origins[m].col + j, b);
            return g;
        }
        case ImageLayout::Video: {
            Tensor g({ps, ps, std::size_t{3}, k});
            for (std::size_t m = 0; m < k; ++m)
                for (std::size_t ch = 0; ch < 3; ++ch)
                    for (std::size_t j = 0; j < ps; ++j)
                        for (std::size_t i = 0; i < ps; ++i)
                            g(i, j, ch, m) = t(origins[m].row + i, origins[m].col + j,
                                               ch, origins[m].slice);
            return g;
        }
        case ImageLayout::Volume: {
            Tensor g({ps, ps, ps, k});
            for (std::size_t m = 0; m < k; ++m)
                for (std::size_t d = 0; d < ps; ++d)
                    for (std::size_t j = 0; j < ps; ++j)
                        for (std::size_t i = 0; i < ps; ++i)
                            g(i, j, d, m) = t(origins[m].row + i, origins[m].col + j,
                                              origins[m].slice + d);
            return g;
        }
    }
    throw std::logic_error("unreachable layout");
}

struct Candidate {
    PatchOrigin at;
    double d2;
};

PatchGroup block_match_impl(const Image& img, const MatchPlane& plane,
                            const PatchOrigin& ref, const FilterConfig& cfg) {
    const int ps = static_cast<int>(cfg.patch_size);
    const int radius = static_cast<int>(cfg.search_radius);
    const int last_r = static_cast<int>(img.height()) - ps;
    const int last_c = static_cast<int>(img.width()) - ps;
    if (last_r < 0 || last_c < 0)
        throw std::invalid_argument("patch size exceeds image extent");
    if (ref.row < 0 || ref.row > last_r || ref.col < 0 || ref.col > last_c)
        throw std::invalid_argument("reference origin outside the valid patch range");

    const int r0 = std::max(0, ref.row - radius);
    const int r1 = std::min(last_r, ref.row + radius);
    const int c0 = std::max(0, ref.col - radius);
    const int c1 = std::min(last_c, ref.col + radius);

    int s0 = 0, s1 = 0;
    const int tr = static_cast<int>(cfg.temporal_radius);
    if (img.layout == ImageLayout::Video) {
        s0 = std::max(0, ref.slice - tr);
        s1 = std::min(static_cast<int>(img.frames()) - 1, ref.slice + tr);
    } else if (img.layout == ImageLayout::Volume) {
        const int last_s = static_cast<int>(img.depth()) - ps;
        if (last_s < 0) throw std::invalid_argument("patch size exceeds volume depth");
        s0 = std::max(0, ref.slice - tr);
        s1 = std::min(last_s, ref.slice + tr);
    }
    if (ref.slice < s0 || ref.slice > s1)
        throw std::invalid_argument("reference slice outside the valid patch range");

    // Scan order (slice, row, col); a stable sort keeps that order among ties.
    std::vector<Candidate> cands;
    cands.reserve(static_cast<std::size_t>(r1 - r0 + 1) * (c1 - c0 + 1) * (s1 - s0 + 1));
    for (int s = s0; s <= s1; ++s)
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) {
                const PatchOrigin at{r, c, s};
                if (at == ref) continue;
                const double d2 = plane.raw
                                      ? cube_distance2(img.tensor, cfg.patch_size, ref, at)
                                      : plane_distance2(plane, cfg.patch_size, ref, at);
                cands.push_back({at, d2});
            }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.d2 < b.d2; });

    PatchGroup g;
    g.reference_index = 0;
    g.origins.push_back(ref);
    const std::size_t want = std::min<std::size_t>(cfg.k_similar - 1, cands.size());
    for (std::size_t i = 0; i < want; ++i) g.origins.push_back(cands[i].at);
    g.data = extract_group(img, g.origins, cfg.patch_size);
    return g;
}

}  // namespace

PatchGroup block_match(const Image& img, const PatchOrigin& ref, const FilterConfig& cfg) {
    cfg.validate();
    return block_match_impl(img, build_match_plane(img), ref, cfg);
}

PatchGroup apply_filter(const PatchGroup& g, const FilterConfig& cfg) {
    cfg.validate();
    PatchGroup out;
    out.origins = g.origins;
    out.reference_index = g.reference_index;
    const double tau = cfg.tau_factor * cfg.sigma;
    switch (cfg.filter) {
        case FilterKind::MSvd: {
            // The thin patch-level transform packs the noise energy of the
            // K x M group unfolding into a K x K coefficient block, so the
            // per-coefficient noise std is sigma * sqrt(M/K); scale the
            // threshold to keep it calibrated to the coefficient domain.
            const std::size_t k = g.data.dim(g.data.order() - 1);
            const double m = static_cast<double>(g.data.size()) / static_cast<double>(k);
            const double concentration = std::sqrt(std::max(1.0, m / static_cast<double>(k)));
            out.data = msvd_hard(g.data, tau * concentration);
            break;
        }
        case FilterKind::HosvdHard:
            out.data = hosvd_hard(g.data, tau);
            break;
        case FilterKind::HosvdTruncate:
            out.data = hosvd_truncate(g.data, cfg.multirank);
            break;
    }
    return out;
}

namespace {

// Uniform-weight overlap accumulator.  Patches are added in a fixed caller
// order, so the floating-point sum sequence per pixel never depends on
// scheduling.
class Accumulator {
public:
    Accumulator(ImageLayout layout, std::vector<std::size_t> canvas_dims, double peak)
        : layout_(layout), sum_(canvas_dims), count_(std::move(canvas_dims)), peak_(peak) {
        check_layout(sum_, layout_);
    }

    void add(const PatchGroup& g) {
        const Tensor& d = g.data;
        if (g.origins.size() != d.dim(d.order() - 1))
            throw std::invalid_argument("group origin count does not match stack extent");
        for (std::size_t m = 0; m < g.origins.size(); ++m) add_member(d, m, g.origins[m]);
    }

    Image finish() const {
        Tensor out(sum_.dims());
        std::size_t gaps = 0;
        std::size_t first_gap = 0;
        for (std::size_t i = 0; i < sum_.size(); ++i) {
            if (count_[i] == 0.0) {
                if (gaps == 0) first_gap = i;
                ++gaps;
            } else {
                out[i] = sum_[i] / count_[i];
            }
        }
        if (gaps > 0) {
            std::ostringstream os;
            os << "aggregation left " << gaps << " voxel(s) uncovered; first at (";
            std::size_t rem = first_gap;
            for (std::size_t a = 0; a < sum_.order(); ++a) {
                if (a) os << ", ";
                os << rem % sum_.dim(a);
                rem /= sum_.dim(a);
            }
            os << ")";
            throw CoverageGapError(os.str());
        }
        return make_image(std::move(out), layout_, peak_);
    }

private:
    void add_member(const Tensor& d, std::size_t m, const PatchOrigin& o) {
        const std::size_t ps = d.dim(0);
        if (o.row < 0 || o.col < 0 || o.slice < 0)
            throw std::invalid_argument("patch origin out of canvas bounds");
        const std::size_t r = o.row, c = o.col, s = o.slice;
        switch (layout_) {
            case ImageLayout::Gray:
                require(d.order() == 3 && s == 0 && r + ps <= sum_.dim(0) &&
                        c + d.dim(1) <= sum_.dim(1));
                for (std::size_t j = 0; j < d.dim(1); ++j)
                    for (std::size_t i = 0; i < ps; ++i)
                        bump(sum_(r + i, c + j), count_(r + i, c + j), d(i, j, m));
                break;
            case ImageLayout::Color:
            case ImageLayout::Multiband:
                require(d.order() == 4 && s == 0 && r + ps <= sum_.dim(0) &&
                        c + d.dim(1) <= sum_.dim(1) && d.dim(2) == sum_.dim(2));
                for (std::size_t b = 0; b < d.dim(2); ++b)
                    for (std::size_t j = 0; j < d.dim(1); ++j)
                        for (std::size_t i = 0; i < ps; ++i)
                            bump(sum_(r + i, c + j, b), count_(r + i, c + j, b),
                                 d(i, j, b, m));
                break;
            case ImageLayout::Volume:
                require(d.order() == 4 && r + ps <= sum_.dim(0) &&
                        c + d.dim(1) <= sum_.dim(1) && s + d.dim(2) <= sum_.dim(2));
                for (std::size_t k = 0; k < d.dim(2); ++k)
                    for (std::size_t j = 0; j < d.dim(1); ++j)
                        for (std::size_t i = 0; i < ps; ++i)
                            bump(sum_(r + i, c + j, s + k), count_(r + i, c + j, s + k),
                                 d(i, j, k, m));
                break;
            case ImageLayout::Video:
                require(d.order() == 4 && d.dim(2) == 3 && r + ps <= sum_.dim(0) &&
                        c + d.dim(1) <= sum_.dim(1) && s < sum_.dim(3));
                for (std::size_t ch = 0; ch < 3; ++ch)
                    for (std::size_t j = 0; j < d.dim(1); ++j)
                        for (std::size_t i = 0; i < ps; ++i)
                            bump(sum_(r + i, c + j, ch, s), count_(r + i, c + j, ch, s),
                                 d(i, j, ch, m));
                break;
        }
    }

    static void require(bool ok) {
        if (!ok) throw std::invalid_argument("patch does not fit the canvas");
    }
    static void bump(double& sum, double& count, double v) {
        sum += v;
        count += 1.0;
    }

    ImageLayout layout_;
    Tensor sum_;
    Tensor count_;
    double peak_;
};

}  // namespace

Image aggregate(const std::vector<PatchGroup>& groups, ImageLayout layout,
                const std::vector<std::size_t>& canvas_dims, double peak) {
    Accumulator acc(layout, canvas_dims, peak);
    for (const PatchGroup& g : groups) acc.add(g);
    return acc.finish();
}

Image addback(const Image& y, const Image& xhat, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("add-back weight must lie in [0, 1]");
    if (!y.tensor.same_dims(xhat.tensor) || y.layout != xhat.layout)
        throw std::invalid_argument("add-back operands must share dims and layout");
    Image out = xhat;
    for (std::size_t i = 0; i < out.tensor.size(); ++i)
        out.tensor[i] = lambda * y.tensor[i] + (1.0 - lambda) * xhat.tensor[i];
    return out;
}

std::size_t worker_count() {
    if (const char* env = std::getenv("NLSS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

namespace {

// References are filtered in fixed batches and merged strictly in batch order,
// so the accumulation sequence (and hence the bits) is the same at any worker
// count.
constexpr std::size_t kBatchRefs = 256;

Image denoise_pass(const Image& img, const FilterConfig& cfg) {
    const std::vector<PatchOrigin> refs = reference_grid(img, cfg.patch_size, cfg.step);
    const MatchPlane plane = build_match_plane(img);
    Accumulator acc(img.layout, img.tensor.dims(), img.peak);

    auto filter_one = [&](const PatchOrigin& ref) {
        return apply_filter(block_match_impl(img, plane, ref, cfg), cfg);
    };

    const std::size_t nbatch = (refs.size() + kBatchRefs - 1) / kBatchRefs;
    const std::size_t workers = std::min(worker_count(), nbatch);
    if (workers <= 1) {
        for (const PatchOrigin& ref : refs) acc.add(filter_one(ref));
        return acc.finish();
    }

    std::vector<std::vector<PatchGroup>> slots(nbatch);
    std::vector<char> ready(nbatch, 0);
    std::mutex mu;
    std::condition_variable batch_done, space_free;
    std::size_t merged = 0;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    bool failed = false;

    auto worker = [&] {
        for (;;) {
            const std::size_t b = next.fetch_add(1);
            if (b >= nbatch) return;
            {
                std::unique_lock<std::mutex> lk(mu);
                space_free.wait(lk, [&] { return failed || b < merged + 2 * workers + 2; });
                if (failed) return;
            }
            std::vector<PatchGroup> out;
            try {
                const std::size_t lo = b * kBatchRefs;
                const std::size_t hi = std::min(refs.size(), lo + kBatchRefs);
                out.reserve(hi - lo);
                for (std::size_t i = lo; i < hi; ++i) out.push_back(filter_one(refs[i]));
            } catch (...) {
                std::lock_guard<std::mutex> lk(mu);
                if (!error) error = std::current_exception();
                failed = true;
                batch_done.notify_all();
                space_free.notify_all();
                return;
            }
            {
                std::lock_guard<std::mutex> lk(mu);
                slots[b] = std::move(out);
                ready[b] = 1;
            }
            batch_done.notify_all();
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);

    for (std::size_t b = 0; b < nbatch; ++b) {
        std::vector<PatchGroup> batch;
        {
            std::unique_lock<std::mutex> lk(mu);
            batch_done.wait(lk, [&] { return failed || ready[b]; });
            if (failed) break;
            batch = std::move(slots[b]);
            slots[b].clear();
            merged = b + 1;
        }
        space_free.notify_all();
        for (const PatchGroup& g : batch) acc.add(g);
    }

    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return acc.finish();
}

}  // namespace

Image denoise(const Image& y, const FilterConfig& cfg) {
    cfg.validate();
    Image current = y;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        Image xhat = denoise_pass(current, cfg);
        if (it + 1 < cfg.iterations)
            current = addback(y, xhat, cfg.lambda_addback);
        else
            current = std::move(xhat);
    }
    return current;
}

Image resize_bilinear(const Image& img, std::size_t out_height, std::size_t out_width) {
    if (out_height < 1 || out_width < 1)
        throw std::invalid_argument("resize target must be at least 1x1");
    const std::size_t ih = img.height(), iw = img.width();
    const std::size_t rest = img.tensor.size() / (ih * iw);

    struct Taps {
        std::size_t lo, hi;
        double t;
    };
    auto build = [](std::size_t in, std::size_t out) {
        std::vector<Taps> taps(out);
        const double ratio = static_cast<double>(in) / static_cast<double>(out);
        for (std::size_t d = 0; d < out; ++d) {
            double src = (static_cast<double>(d) + 0.5) * ratio - 0.5;
            src = std::clamp(src, 0.0, static_cast<double>(in - 1));
            const std::size_t lo = static_cast<std::size_t>(src);
            taps[d] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
        }
        return taps;
    };
    const auto row_taps = build(ih, out_height);
    const auto col_taps = build(iw, out_width);

    std::vector<std::size_t> out_dims = img.tensor.dims();
    out_dims[0] = out_height;
    out_dims[1] = out_width;
    Tensor out(out_dims);
    const double* src = img.tensor.data();
    double* dst = out.data();
    for (std::size_t q = 0; q < rest; ++q) {
        const double* sp = src + q * ih * iw;
        double* dp = dst + q * out_height * out_width;
        for (std::size_t j = 0; j < out_width; ++j) {
            const Taps& ct = col_taps[j];
            for (std::size_t i = 0; i < out_height; ++i) {
                const Taps& rt = row_taps[i];
                const double v00 = sp[rt.lo + ih * ct.lo];
                const double v10 = sp[rt.hi + ih * ct.lo];
                const double v01 = sp[rt.lo + ih * ct.hi];
                const double v11 = sp[rt.hi + ih * ct.hi];
                const double top = v00 + (v10 - v00) * rt.t;
                const double bot = v01 + (v11 - v01) * rt.t;
                dp[i + out_height * j] = top + (bot - top) * ct.t;
            }
        }
    }
    return make_image(std::move(out), img.layout, img.peak);
}

Image resize_denoise(const Image& y, double scale, const FilterConfig& cfg) {
    cfg.validate();
    if (!(scale > 0.0 && scale < 1.0))
        throw std::invalid_argument("resize scale must lie in (0, 1)");
    const auto scaled = [scale](std::size_t v) {
        return static_cast<std::size_t>(
            std::max<long long>(1, std::llround(static_cast<double>(v) * scale)));
    };
    const std::size_t sh = scaled(y.height());
    const std::size_t sw = scaled(y.width());
    if (sh < cfg.patch_size || sw < cfg.patch_size)
        throw std::invalid_argument("downsized image is smaller than the patch size");
    FilterConfig small_cfg = cfg;
    small_cfg.sigma = cfg.sigma * scale;
    const Image den = denoise(resize_bilinear(y, sh, sw), small_cfg);
    return resize_bilinear(den, y.height(), y.width());
}

}  // namespace nlss
