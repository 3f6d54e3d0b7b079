#include "nlss/image.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace nlss {

const char* layout_name(ImageLayout layout) {
    switch (layout) {
        case ImageLayout::Gray: return "gray";
        case ImageLayout::Color: return "color";
        case ImageLayout::Multiband: return "multiband";
        case ImageLayout::Volume: return "volume";
        case ImageLayout::Video: return "video";
    }
    return "?";
}

void check_layout(const Tensor& t, ImageLayout layout) {
    const auto fail = [&](const char* want) {
        throw std::invalid_argument(std::string("image: tensor shape not valid for ") +
                                    layout_name(layout) + " layout (want " + want + ")");
    };
    switch (layout) {
        case ImageLayout::Gray:
            if (t.order() != 2) fail("H x W");
            break;
        case ImageLayout::Color:
            if (t.order() != 3 || t.dim(2) != 3) fail("H x W x 3");
            break;
        case ImageLayout::Multiband:
            if (t.order() != 3) fail("H x W x B");
            break;
        case ImageLayout::Volume:
            if (t.order() != 3) fail("H x W x D");
            break;
        case ImageLayout::Video:
            if (t.order() != 4 || t.dim(2) != 3) fail("H x W x 3 x F");
            break;
    }
}

Image make_image(Tensor t, ImageLayout layout, double peak) {
    check_layout(t, layout);
    if (!(peak > 0.0)) {
        throw std::invalid_argument("image: peak must be positive");
    }
    return Image{std::move(t), layout, peak};
}

Image video_frame(const Image& video, std::size_t frame) {
    if (video.layout != ImageLayout::Video) {
        throw std::invalid_argument("video_frame: image is not a video");
    }
    if (frame >= video.frames()) {
        throw std::invalid_argument("video_frame: frame index out of range");
    }
    const std::size_t h = video.height(), w = video.width();
    const std::size_t slab = h * w * 3;
    std::vector<double> values(video.tensor.data() + frame * slab,
                               video.tensor.data() + (frame + 1) * slab);
    return Image{Tensor({h, w, 3}, std::move(values)), ImageLayout::Color, video.peak};
}

}  // namespace nlss
