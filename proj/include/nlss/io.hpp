#pragma once

#include "nlss/image.hpp"
#include "nlss/tensor.hpp"

#include <optional>
#include <string>

namespace nlss {

// MDT1 container: magic "MDT1", u32 LE mode count, u64 LE extents, then f32 LE
// values in first-index-fastest order.
Tensor read_mdt1(const std::string& path);
void write_mdt1(const Tensor& t, const std::string& path);

// 8-bit PNG; grayscale files load as Gray, everything else as Color (palette
// and 16-bit inputs are expanded/narrowed, alpha is dropped).
Image read_png(const std::string& path);

// Gray or Color only; values are clamped to [0, 255] and rounded
// half-away-from-zero to 8-bit samples.
void write_png(const Image& img, const std::string& path);

// "gray" | "color" | "msi" | "mri" | "video" -> layout, else nullopt.
std::optional<ImageLayout> parse_layout_name(const std::string& name);

// Dispatches on extension (.png, .mdt1/.mdt).  Without a hint, tensor order
// picks the layout: 2 -> Gray, 3 -> Color when the third extent is 3 else
// Multiband, 4 -> Video.
Image load_image(const std::string& path, std::optional<ImageLayout> hint = {},
                 double peak = 255.0);
void save_image(const Image& img, const std::string& path);

}  // namespace nlss
