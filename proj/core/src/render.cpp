#include "liquidsense/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svg_detail.hpp"

namespace liquidsense {

namespace {

using svgdet::num;

constexpr Rgb kBackground{255, 255, 255};
constexpr Rgb kGrid{220, 220, 220};
constexpr Rgb kAxis{80, 80, 80};
constexpr Rgb kTrace{20, 60, 160};
constexpr Rgb kBoxColor{200, 30, 30};

struct PlotFrame {
    // Pixel margins around the plot area.
    int left = 32, right = 8, top = 8, bottom = 20;
    int width, height;
    double t_max, y_min, y_max;

    double x_of(double t) const {
        return left + (t / t_max) * (width - left - right);
    }
    double y_of(double v) const {
        const double clamped = std::clamp(v, y_min, y_max);
        return top + (y_max - clamped) / (y_max - y_min) * (height - top - bottom);
    }
};

void check_box(const PlotImage& image, const BBox& box) {
    if (box.w <= 0 || box.h <= 0 || box.x < 0 || box.y < 0 ||
        box.x + box.w > image.width || box.y + box.h > image.height)
        throw BoxOutOfBounds("box " + std::to_string(box.index) + " [" +
                             std::to_string(box.x) + "," + std::to_string(box.y) + " " +
                             std::to_string(box.w) + "x" + std::to_string(box.h) +
                             "] exceeds image " + std::to_string(image.width) + "x" +
                             std::to_string(image.height));
}

std::string default_caption(const TorqueSignal& signal) {
    std::ostringstream out;
    out << "standardized torque";
    if (signal.meta.liquid_id >= 0) out << ", liquid " << signal.meta.liquid_id;
    if (signal.meta.fill) out << ", " << to_string(*signal.meta.fill) << " full";
    return out.str();
}

PlotImage render_timeseries_svg(const TorqueSignal& signal, const PlotStyle& style) {
    const PlotFrame frame{.width = style.width,
                          .height = style.height,
                          .t_max = signal.duration_s,
                          .y_min = style.y_min,
                          .y_max = style.y_max};
    std::ostringstream out;
    out << svgdet::open_tag(style.width, style.height) << "\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height
        << "\" fill=\"#ffffff\"/>\n";

    if (style.grid) {
        for (int t = 0; t <= static_cast<int>(signal.duration_s); ++t)
            out << "<line x1=\"" << num(frame.x_of(t)) << "\" y1=\"" << frame.top << "\" x2=\""
                << num(frame.x_of(t)) << "\" y2=\"" << style.height - frame.bottom
                << "\" stroke=\"#dcdcdc\" stroke-width=\"0.5\"/>\n";
        for (int v = static_cast<int>(std::ceil(style.y_min));
             v <= static_cast<int>(std::floor(style.y_max)); ++v)
            out << "<line x1=\"" << frame.left << "\" y1=\"" << num(frame.y_of(v)) << "\" x2=\""
                << style.width - frame.right << "\" y2=\"" << num(frame.y_of(v))
                << "\" stroke=\"#dcdcdc\" stroke-width=\"0.5\"/>\n";
    }
    out << "<rect x=\"" << frame.left << "\" y=\"" << frame.top << "\" width=\""
        << style.width - frame.left - frame.right << "\" height=\""
        << style.height - frame.top - frame.bottom
        << "\" fill=\"none\" stroke=\"#505050\" stroke-width=\"1\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"#143ca0\" stroke-width=\"" << num(style.stroke_width)
        << "\" points=\"";
    for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const double t = static_cast<double>(i) / signal.sample_rate_hz;
        if (i) out << ' ';
        out << num(frame.x_of(t)) << ',' << num(frame.y_of(signal.samples[i]));
    }
    out << "\"/>\n</svg>\n";

    PlotImage image;
    image.width = style.width;
    image.height = style.height;
    image.format = ImageFormat::SVG;
    image.bytes = svgdet::to_bytes(out.str());
    image.caption = default_caption(signal);
    return image;
}

PlotImage render_timeseries_png(const TorqueSignal& signal, const PlotStyle& style) {
    const PlotFrame frame{.width = style.width,
                          .height = style.height,
                          .t_max = signal.duration_s,
                          .y_min = style.y_min,
                          .y_max = style.y_max};
    Canvas canvas(style.width, style.height, kBackground);

    if (style.grid) {
        for (int t = 0; t <= static_cast<int>(signal.duration_s); ++t)
            canvas.line(frame.x_of(t), frame.top, frame.x_of(t), style.height - frame.bottom,
                        kGrid);
        for (int v = static_cast<int>(std::ceil(style.y_min));
             v <= static_cast<int>(std::floor(style.y_max)); ++v)
            canvas.line(frame.left, frame.y_of(v), style.width - frame.right, frame.y_of(v),
                        kGrid);
    }
    canvas.rect_outline(frame.left, frame.top, style.width - frame.left - frame.right,
                        style.height - frame.top - frame.bottom, kAxis);

    for (std::size_t i = 1; i < signal.samples.size(); ++i) {
        const double t0 = static_cast<double>(i - 1) / signal.sample_rate_hz;
        const double t1 = static_cast<double>(i) / signal.sample_rate_hz;
        canvas.line(frame.x_of(t0), frame.y_of(signal.samples[i - 1]), frame.x_of(t1),
                    frame.y_of(signal.samples[i]), kTrace);
    }
    return encode_png(canvas, default_caption(signal));
}

}  // namespace

std::string to_string(ImageFormat f) {
    return f == ImageFormat::SVG ? "svg" : "png";
}

ImageFormat image_format_from_string(const std::string& s) {
    if (s == "svg" || s == "SVG") return ImageFormat::SVG;
    if (s == "png" || s == "PNG") return ImageFormat::PNG;
    throw Error("unknown image format: " + s);
}

PlotImage render_timeseries(const TorqueSignal& signal, const PlotStyle& style) {
    if (signal.samples.empty()) throw EmptySignal("cannot render an empty signal");
    if (signal.meta.stage != SignalStage::Standardized)
        throw WrongStage("render_timeseries expects a standardized signal, got stage " +
                         to_string(signal.meta.stage));
    return style.format == ImageFormat::SVG ? render_timeseries_svg(signal, style)
                                            : render_timeseries_png(signal, style);
}

PlotImage concat_horizontal(const PlotImage& left, const PlotImage& right) {
    if (left.height != right.height)
        throw MismatchedDimensions("heights differ: " + std::to_string(left.height) + " vs " +
                                   std::to_string(right.height));
    if (left.format != right.format)
        throw MismatchedDimensions("formats differ: " + to_string(left.format) + " vs " +
                                   to_string(right.format));

    PlotImage out;
    out.width = left.width + right.width;
    out.height = left.height;
    out.format = left.format;
    out.caption = "(left) " + left.caption + " (right) " + right.caption;

    if (left.format == ImageFormat::SVG) {
        // Nest both documents; the right one is shifted by the left width.
        std::string doc = svgdet::open_tag(out.width, out.height) + "\n";
        doc += svgdet::strip_decl(svgdet::to_string(left.bytes));
        doc += svgdet::inject_root_attrs(svgdet::strip_decl(svgdet::to_string(right.bytes)),
                                         "x=\"" + std::to_string(left.width) + "\"");
        doc += "</svg>\n";
        out.bytes = svgdet::to_bytes(doc);
    } else {
        const Canvas a = decode_png(left);
        const Canvas b = decode_png(right);
        Canvas merged(out.width, out.height, kBackground);
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) merged.set_pixel(x, y, a.pixel(x, y));
        for (int y = 0; y < b.height(); ++y)
            for (int x = 0; x < b.width(); ++x)
                merged.set_pixel(x + a.width(), y, b.pixel(x, y));
        out.bytes = encode_png(merged).bytes;
    }
    return out;
}

PlotImage annotate_scene(const PlotImage& scene, const std::vector<BBox>& boxes) {
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        check_box(scene, boxes[i]);
        for (std::size_t j = i + 1; j < boxes.size(); ++j)
            if (boxes[i].index == boxes[j].index)
                throw Error("duplicate bounding-box index " + std::to_string(boxes[i].index));
    }

    PlotImage out = scene;
    if (boxes.empty()) return out;

    if (scene.format == ImageFormat::SVG) {
        std::string doc = svgdet::to_string(scene.bytes);
        std::ostringstream extra;
        for (const auto& box : boxes) {
            const int label_y = std::max(box.y - 6, 12);
            extra << "<rect x=\"" << box.x << "\" y=\"" << box.y << "\" width=\"" << box.w
                  << "\" height=\"" << box.h
                  << "\" fill=\"none\" stroke=\"#c81e1e\" stroke-width=\"2\"/>\n";
            extra << "<text x=\"" << box.x << "\" y=\"" << label_y
                  << "\" fill=\"#c81e1e\" font-family=\"monospace\" font-size=\"14\">"
                  << box.index << "</text>\n";
        }
        doc.insert(svgdet::closing_tag_pos(doc), extra.str());
        out.bytes = svgdet::to_bytes(doc);
    } else {
        Canvas canvas = decode_png(scene);
        for (const auto& box : boxes) {
            canvas.rect_outline(box.x, box.y, box.w, box.h, kBoxColor, 2);
            const int label_y = std::max(box.y - 10, 0);
            canvas.draw_digits(std::to_string(box.index), box.x, label_y, 1, kBoxColor);
        }
        out.bytes = encode_png(canvas).bytes;
    }
    return out;
}

PlotImage crop(const PlotImage& scene, const BBox& box) {
    check_box(scene, box);

    PlotImage out;
    out.width = box.w;
    out.height = box.h;
    out.format = scene.format;
    out.caption = scene.caption + " [crop " + std::to_string(box.index) + "]";

    if (scene.format == ImageFormat::SVG) {
        // A viewBox window over the nested original document.
        std::string doc = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                          std::to_string(box.w) + "\" height=\"" + std::to_string(box.h) +
                          "\" viewBox=\"" + std::to_string(box.x) + " " + std::to_string(box.y) +
                          " " + std::to_string(box.w) + " " + std::to_string(box.h) + "\">\n";
        doc += svgdet::strip_decl(svgdet::to_string(scene.bytes));
        doc += "</svg>\n";
        out.bytes = svgdet::to_bytes(doc);
    } else {
        const Canvas full = decode_png(scene);
        Canvas region(box.w, box.h, kBackground);
        for (int y = 0; y < box.h; ++y)
            for (int x = 0; x < box.w; ++x)
                region.set_pixel(x, y, full.pixel(box.x + x, box.y + y));
        out.bytes = encode_png(region).bytes;
    }
    return out;
}

PlotImage load_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image: " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    PlotImage image;
    image.bytes = std::move(bytes);
    const auto ext = path.extension().string();
    if (ext == ".svg") {
        image.format = ImageFormat::SVG;
        const auto [w, h] = svg_dimensions(image.bytes);
        image.width = w;
        image.height = h;
    } else if (ext == ".png") {
        image.format = ImageFormat::PNG;
        const Canvas canvas = decode_png(image);
        image.width = canvas.width();
        image.height = canvas.height();
    } else {
        throw ImageDecodeError("unsupported image extension: " + ext);
    }
    image.caption = path.stem().string();
    return image;
}

void save_image(const PlotImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write image: " + path.string());
    out.write(reinterpret_cast<const char*>(image.bytes.data()),
              static_cast<std::streamsize>(image.bytes.size()));
}

}  // namespace liquidsense
