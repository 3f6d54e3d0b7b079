#include "nlss/io.hpp"

#include "nlss/errors.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace nlss {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw DataError(path + ": " + what);
}

}  // namespace

Tensor read_mdt1(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open for reading");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 8 || bytes[0] != 'M' || bytes[1] != 'D' || bytes[2] != 'T' ||
        bytes[3] != '1')
        fail(path, "bad magic at offset 0 (not an MDT1 file)");
    const std::uint32_t order = get_u32(bytes.data() + 4);
    if (order < 1 || order > 32) {
        std::ostringstream os;
        os << "implausible mode count " << order << " at offset 4";
        fail(path, os.str());
    }
    const std::size_t header = 8 + std::size_t{8} * order;
    if (bytes.size() < header) {
        std::ostringstream os;
        os << "truncated header: declared " << header << " bytes, found " << bytes.size();
        fail(path, os.str());
    }
    std::vector<std::size_t> dims(order);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < order; ++i) {
        const std::uint64_t e = get_u64(bytes.data() + 8 + 8 * i);
        if (e < 1) fail(path, "zero extent in header");
        if (e > std::numeric_limits<std::size_t>::max() / 4 / count)
            fail(path, "extent product overflows");
        dims[i] = static_cast<std::size_t>(e);
        count *= dims[i];
    }
    const std::size_t declared = 4 * count;
    const std::size_t actual = bytes.size() - header;
    if (actual != declared) {
        std::ostringstream os;
        os << (actual < declared ? "truncated" : "oversized")
           << " MDT1 payload: declared " << declared << " value bytes, found " << actual;
        fail(path, os.str());
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t raw = get_u32(bytes.data() + header + 4 * i);
        values[i] = static_cast<double>(std::bit_cast<float>(raw));
    }
    return Tensor(std::move(dims), std::move(values));
}

void write_mdt1(const Tensor& t, const std::string& path) {
    if (t.order() == 0) throw std::invalid_argument("cannot serialize an empty tensor");
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(path, "cannot open for writing");
    f.write("MDT1", 4);
    put_u32(f, static_cast<std::uint32_t>(t.order()));
    for (std::size_t i = 0; i < t.order(); ++i) put_u64(f, t.dim(i));
    for (std::size_t i = 0; i < t.size(); ++i)
        put_u32(f, std::bit_cast<std::uint32_t>(static_cast<float>(t[i])));
    if (!f) fail(path, "write failed");
}

namespace {

struct FileCloser {
    std::FILE* fp = nullptr;
    ~FileCloser() {
        if (fp) std::fclose(fp);
    }
};

}  // namespace

Image read_png(const std::string& path) {
    FileCloser fc;
    fc.fp = std::fopen(path.c_str(), "rb");
    if (!fc.fp) fail(path, "cannot open for reading");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fc.fp) != 8 || png_sig_cmp(sig, 0, 8))
        fail(path, "bad signature at offset 0 (not a PNG file)");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                             nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(path, "libpng init failed");
    }

    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(path, "libpng failed to decode");
    }

    png_init_io(png, fc.fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_uint_32 h = png_get_image_height(png, info);
    const png_uint_32 w = png_get_image_width(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::ostringstream os;
        os << "unsupported channel count " << channels;
        fail(path, os.str());
    }

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 r = 0; r < h; ++r) rows[r] = pixels.data() + r * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels == 1) {
        Tensor t({h, w});
        for (png_uint_32 r = 0; r < h; ++r)
            for (png_uint_32 c = 0; c < w; ++c) t(r, c) = rows[r][c];
        return make_image(std::move(t), ImageLayout::Gray);
    }
    Tensor t({h, w, std::size_t{3}});
    for (png_uint_32 r = 0; r < h; ++r)
        for (png_uint_32 c = 0; c < w; ++c)
            for (std::size_t ch = 0; ch < 3; ++ch)
                t(r, c, ch) = rows[r][3 * c + ch];
    return make_image(std::move(t), ImageLayout::Color);
}

void write_png(const Image& img, const std::string& path) {
    if (img.layout != ImageLayout::Gray && img.layout != ImageLayout::Color)
        throw std::invalid_argument("png output supports gray or color images only");
    const std::size_t h = img.height(), w = img.width();
    const std::size_t channels = img.layout == ImageLayout::Color ? 3 : 1;

    std::vector<unsigned char> pixels(h * w * channels);
    std::vector<png_bytep> rows(h);
    for (std::size_t r = 0; r < h; ++r) {
        rows[r] = pixels.data() + r * w * channels;
        for (std::size_t c = 0; c < w; ++c)
            for (std::size_t ch = 0; ch < channels; ++ch) {
                const double v = channels == 1 ? img.tensor(r, c) : img.tensor(r, c, ch);
                const double q = std::clamp(std::round(v), 0.0, 255.0);
                rows[r][c * channels + ch] = static_cast<unsigned char>(q);
            }
    }

    FileCloser fc;
    fc.fp = std::fopen(path.c_str(), "wb");
    if (!fc.fp) fail(path, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                              nullptr);
    if (!png) fail(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(path, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(path, "libpng failed to encode");
    }
    png_init_io(png, fc.fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
}

std::optional<ImageLayout> parse_layout_name(const std::string& name) {
    if (name == "gray") return ImageLayout::Gray;
    if (name == "color") return ImageLayout::Color;
    if (name == "msi") return ImageLayout::Multiband;
    if (name == "mri") return ImageLayout::Volume;
    if (name == "video") return ImageLayout::Video;
    return std::nullopt;
}

namespace {

std::string lower_extension(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

ImageLayout infer_layout(const Tensor& t, const std::string& path) {
    switch (t.order()) {
        case 2: return ImageLayout::Gray;
        case 3: return t.dim(2) == 3 ? ImageLayout::Color : ImageLayout::Multiband;
        case 4:
            if (t.dim(2) == 3) return ImageLayout::Video;
            fail(path, "4-mode tensor needs extent 3 on the channel axis for video");
        default: {
            std::ostringstream os;
            os << "no layout for a " << t.order() << "-mode tensor";
            fail(path, os.str());
        }
    }
}

}  // namespace

Image load_image(const std::string& path, std::optional<ImageLayout> hint, double peak) {
    const std::string ext = lower_extension(path);
    Tensor t;
    if (ext == ".png") {
        Image img = read_png(path);
        img.peak = peak;
        if (!hint || *hint == img.layout) return img;
        t = std::move(img.tensor);
    } else if (ext == ".mdt1" || ext == ".mdt") {
        t = read_mdt1(path);
    } else {
        fail(path, "unsupported extension '" + ext + "' (expected .png, .mdt or .mdt1)");
    }
    const ImageLayout layout = hint ? *hint : infer_layout(t, path);
    try {
        return make_image(std::move(t), layout, peak);
    } catch (const std::invalid_argument& e) {
        fail(path, std::string("not a valid ") + layout_name(layout) + " image: " +
                       e.what());
    }
}

void save_image(const Image& img, const std::string& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_png(img, path);
    } else if (ext == ".mdt1" || ext == ".mdt") {
        write_mdt1(img.tensor, path);
    } else {
        fail(path, "unsupported extension '" + ext + "' (expected .png, .mdt or .mdt1)");
    }
}

}  // namespace nlss
