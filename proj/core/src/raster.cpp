#include <png.h>

#include <cmath>
#include <cstring>

#include "liquidsense/render.hpp"

namespace liquidsense {

namespace {

// 5x7 bitmap font for the bounding-box index labels. Bit 4 is the leftmost
// column of each row.
constexpr std::uint8_t kDigitFont[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

struct MemoryReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void read_bytes(png_structp png, png_bytep out, png_size_t length) {
    auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (reader->pos + length > reader->size)
        png_error(png, "read past end of PNG buffer");
    std::memcpy(out, reader->data + reader->pos, length);
    reader->pos += length;
}

}  // namespace

Canvas::Canvas(int width, int height, Rgb background) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw Error("canvas dimensions must be positive");
    rgb_.resize(static_cast<std::size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) set_pixel(x, y, background);
}

void Canvas::set_pixel(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    rgb_[i] = c.r;
    rgb_[i + 1] = c.g;
    rgb_[i + 2] = c.b;
}

Rgb Canvas::pixel(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
        throw Error("pixel out of bounds");
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
    return Rgb{rgb_[i], rgb_[i + 1], rgb_[i + 2]};
}

void Canvas::fill_rect(int x, int y, int w, int h, Rgb c) {
    for (int j = y; j < y + h; ++j)
        for (int i = x; i < x + w; ++i) set_pixel(i, j, c);
}

void Canvas::rect_outline(int x, int y, int w, int h, Rgb c, int thickness) {
    for (int t = 0; t < thickness; ++t) {
        for (int i = x; i < x + w; ++i) {
            set_pixel(i, y + t, c);
            set_pixel(i, y + h - 1 - t, c);
        }
        for (int j = y; j < y + h; ++j) {
            set_pixel(x + t, j, c);
            set_pixel(x + w - 1 - t, j, c);
        }
    }
}

void Canvas::line(double x0, double y0, double x1, double y1, Rgb c) {
    // DDA stepping at sub-pixel resolution.
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        set_pixel(static_cast<int>(std::lround(x0 + t * dx)),
                  static_cast<int>(std::lround(y0 + t * dy)), c);
    }
}

void Canvas::draw_digits(const std::string& digits, int x, int y, int scale, Rgb c) {
    int cx = x;
    for (char ch : digits) {
        if (ch < '0' || ch > '9') {
            cx += 6 * scale;
            continue;
        }
        const auto& glyph = kDigitFont[ch - '0'];
        for (int row = 0; row < 7; ++row)
            for (int col = 0; col < 5; ++col)
                if (glyph[row] & (1 << (4 - col)))
                    fill_rect(cx + col * scale, y + row * scale, scale, scale, c);
        cx += 6 * scale;
    }
}

PlotImage encode_png(const Canvas& canvas, std::string caption) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error("png_create_info_struct failed");
    }

    std::vector<std::uint8_t> out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error("PNG encode failed");
    }
    png_set_write_fn(png, &out, append_bytes, nullptr);

    // Fixed settings keep the byte stream deterministic.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_FILTER_NONE);
    png_set_IHDR(png, info, canvas.width(), canvas.height(), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_bytep> rows(canvas.height());
    const auto* base = canvas.data().data();
    for (int y = 0; y < canvas.height(); ++y)
        rows[y] = const_cast<png_bytep>(base + static_cast<std::size_t>(y) * canvas.width() * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);

    PlotImage image;
    image.width = canvas.width();
    image.height = canvas.height();
    image.format = ImageFormat::PNG;
    image.bytes = std::move(out);
    image.caption = std::move(caption);
    return image;
}

Canvas decode_png(const PlotImage& image) {
    if (image.format != ImageFormat::PNG)
        throw ImageDecodeError("decode_png expects a PNG image");
    if (image.bytes.size() < 8 || png_sig_cmp(image.bytes.data(), 0, 8) != 0)
        throw ImageDecodeError("not a PNG byte stream");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw Error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageDecodeError("PNG decode failed");
    }

    MemoryReader reader{image.bytes.data(), image.bytes.size(), 0};
    png_set_read_fn(png, &reader, read_bytes);
    png_read_info(png, info);

    // Normalize any input to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));

    Canvas canvas(width, height, Rgb{0, 0, 0});
    std::vector<png_bytep> rows(height);
    auto* base = const_cast<std::uint8_t*>(canvas.data().data());
    for (int y = 0; y < height; ++y)
        rows[y] = base + static_cast<std::size_t>(y) * width * 3;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    return canvas;
}

}  // namespace liquidsense
