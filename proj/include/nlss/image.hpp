#pragma once

#include "nlss/tensor.hpp"

#include <cstddef>
#include <string>

namespace nlss {

// Axis roles for the tensor carried by an Image:
//   Gray       H x W
//   Color      H x W x 3
//   Multiband  H x W x B        (B spectral bands, B >= 1)
//   Volume     H x W x D        (D slices; patches are cubes)
//   Video      H x W x 3 x F    (F frames)
enum class ImageLayout { Gray, Color, Multiband, Volume, Video };

const char* layout_name(ImageLayout layout);

struct Image {
    Tensor tensor;
    ImageLayout layout = ImageLayout::Gray;
    double peak = 255.0;

    std::size_t height() const { return tensor.dim(0); }
    std::size_t width() const { return tensor.dim(1); }

    // Extent of axis 2 (channels, bands or slices); 1 for Gray.
    std::size_t depth() const { return tensor.order() >= 3 ? tensor.dim(2) : 1; }

    std::size_t frames() const {
        return layout == ImageLayout::Video ? tensor.dim(3) : 1;
    }
};

// Validates that the tensor shape is legal for the layout; throws
// std::invalid_argument otherwise.
Image make_image(Tensor t, ImageLayout layout, double peak = 255.0);

void check_layout(const Tensor& t, ImageLayout layout);

// Color view of one frame of a video (copies the frame slab).
Image video_frame(const Image& video, std::size_t frame);

}  // namespace nlss
