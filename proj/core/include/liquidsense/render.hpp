#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "liquidsense/core.hpp"

namespace liquidsense {

enum class ImageFormat { SVG, PNG };

std::string to_string(ImageFormat f);
ImageFormat image_format_from_string(const std::string& s);

/// An image artifact handed to reasoning backends or written to disk.
struct PlotImage {
    int width = 0;
    int height = 0;
    ImageFormat format = ImageFormat::SVG;
    std::vector<std::uint8_t> bytes;
    std::string caption;
};

/// Axis-aligned box with the on-image index label.
struct BBox {
    int index = 0;
    int x = 0, y = 0, w = 0, h = 0;

    bool operator==(const BBox&) const = default;
};

struct PlotStyle {
    int width = 400;
    int height = 300;
    ImageFormat format = ImageFormat::SVG;
    double stroke_width = 1.2;
    bool grid = true;
    double y_min = -3.0;  // fixed range for standardized plots
    double y_max = 3.0;
};

// ---------------------------------------------------------------------------
// Raster canvas (RGB8)
// ---------------------------------------------------------------------------

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

class Canvas {
public:
    Canvas() = default;
    Canvas(int width, int height, Rgb background);

    int width() const { return width_; }
    int height() const { return height_; }

    void set_pixel(int x, int y, Rgb c);
    Rgb pixel(int x, int y) const;

    void fill_rect(int x, int y, int w, int h, Rgb c);
    void rect_outline(int x, int y, int w, int h, Rgb c, int thickness = 1);
    void line(double x0, double y0, double x1, double y1, Rgb c);
    /// Draw a run of decimal digits with a 5x7 bitmap font.
    void draw_digits(const std::string& digits, int x, int y, int scale, Rgb c);

    const std::vector<std::uint8_t>& data() const { return rgb_; }

private:
    int width_ = 0, height_ = 0;
    std::vector<std::uint8_t> rgb_;
};

/// PNG-encode with fixed settings (deterministic bytes for a given canvas).
PlotImage encode_png(const Canvas& canvas, std::string caption = {});
Canvas decode_png(const PlotImage& image);

// ---------------------------------------------------------------------------
// Rendering operations
// ---------------------------------------------------------------------------

/// Line plot of a standardized signal: x axis 0..duration seconds, y axis
/// fixed to [style.y_min, style.y_max]. The SVG polyline has exactly one
/// vertex per sample. Throws EmptySignal/WrongStage.
PlotImage render_timeseries(const TorqueSignal& signal, const PlotStyle& style = {});

/// Place `right` fully to the right of `left`. Requires equal heights and
/// formats; captions join as "(left) ... (right) ...".
PlotImage concat_horizontal(const PlotImage& left, const PlotImage& right);

/// Draw each box with its index number rendered above the box.
PlotImage annotate_scene(const PlotImage& scene, const std::vector<BBox>& boxes);

/// Cut the boxed region out; output dimensions equal (box.w, box.h).
PlotImage crop(const PlotImage& scene, const BBox& box);

// ---------------------------------------------------------------------------
// Image file I/O
// ---------------------------------------------------------------------------

PlotImage load_image(const std::filesystem::path& path);
void save_image(const PlotImage& image, const std::filesystem::path& path);

/// Parse width/height from an SVG document root tag.
std::pair<int, int> svg_dimensions(const std::vector<std::uint8_t>& bytes);

}  // namespace liquidsense
