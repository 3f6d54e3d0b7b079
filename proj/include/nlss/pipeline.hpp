#pragma once

#include "nlss/image.hpp"
#include "nlss/tensor.hpp"

#include <cstddef>
#include <vector>

namespace nlss {

// Top-left corner of a patch.  slice is the frame index for video, the
// z coordinate for volumes, 0 for flat images.
struct PatchOrigin {
    int row = 0;
    int col = 0;
    int slice = 0;

    bool operator==(const PatchOrigin&) const = default;
};

// K similar patches stacked on the last mode of `data`:
//   Gray       ps x ps x K
//   Color      ps x ps x 3 x K
//   Multiband  ps x ps x B x K
//   Volume     ps x ps x ps x K   (cubes)
//   Video      ps x ps x 3 x K    (origins carry the frame)
// Member 0 is always the reference patch.
struct PatchGroup {
    Tensor data;
    std::vector<PatchOrigin> origins;
    std::size_t reference_index = 0;
};

enum class FilterKind { MSvd, HosvdHard, HosvdTruncate };

const char* filter_name(FilterKind kind);

struct FilterConfig {
    std::size_t patch_size = 8;
    std::size_t step = 4;
    std::size_t search_radius = 19;
    std::size_t k_similar = 32;
    FilterKind filter = FilterKind::MSvd;
    double tau_factor = 2.7;                 // threshold tau = tau_factor * sigma
    std::vector<std::size_t> multirank;      // HosvdTruncate only
    double lambda_addback = 0.0;             // [0, 1]
    std::size_t iterations = 1;
    double sigma = 0.0;                      // working noise std, intensity units
    std::size_t temporal_radius = 2;         // frame/slice half-window

    void validate() const;  // throws std::invalid_argument
};

// Grid positions along one axis at the given stride; the last valid position
// is always included so patch coverage reaches the border.
std::vector<std::size_t> grid_positions(std::size_t extent, std::size_t patch,
                                        std::size_t step);

std::vector<PatchOrigin> reference_grid(const Image& img, std::size_t patch_size,
                                        std::size_t step);

// Exhaustive similar-patch search in the window around `ref` (Chebyshev
// radius cfg.search_radius in space, cfg.temporal_radius across
// frames/slices), ranked by squared Euclidean distance on the matching
// plane.  Color, video and multiband data match on the channel sum.  Ties
// break in (slice, row, col) scan order; the reference is always member 0.
PatchGroup block_match(const Image& img, const PatchOrigin& ref, const FilterConfig& cfg);

// Runs the configured collaborative filter on the group data; origins pass
// through unchanged.
PatchGroup apply_filter(const PatchGroup& g, const FilterConfig& cfg);

// Writes every filtered patch back to its origin and averages overlaps with
// uniform weights.  Pixels covered by no patch raise CoverageGapError.
Image aggregate(const std::vector<PatchGroup>& groups, ImageLayout layout,
                const std::vector<std::size_t>& canvas_dims, double peak = 255.0);

// lambda * y + (1 - lambda) * xhat, elementwise.
Image addback(const Image& y, const Image& xhat, double lambda);

// Grouping -> collaborative filtering -> aggregation, iterated with add-back
// between passes.  Deterministic for a fixed (y, cfg) at any thread count.
Image denoise(const Image& y, const FilterConfig& cfg);

Image resize_bilinear(const Image& img, std::size_t out_height, std::size_t out_width);

// Denoise a bilinearly downsized copy (working sigma scaled by the same
// factor), then upscale back to the original extent.
Image resize_denoise(const Image& y, double scale, const FilterConfig& cfg);

// Worker cap: NLSS_THREADS when set, hardware concurrency otherwise.
std::size_t worker_count();

}  // namespace nlss
