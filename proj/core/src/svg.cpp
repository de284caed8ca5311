#include <cstdio>
#include <cstdlib>

#include "liquidsense/render.hpp"
#include "svg_detail.hpp"

namespace liquidsense {

namespace svgdet {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string open_tag(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">";
}

std::string strip_decl(const std::string& svg) {
    if (svg.rfind("<?xml", 0) == 0) {
        const auto end = svg.find("?>");
        if (end != std::string::npos) {
            std::size_t start = end + 2;
            while (start < svg.size() && (svg[start] == '\n' || svg[start] == '\r')) ++start;
            return svg.substr(start);
        }
    }
    return svg;
}

std::string inject_root_attrs(const std::string& svg, const std::string& attrs) {
    const auto pos = svg.find("<svg");
    if (pos == std::string::npos) throw ImageDecodeError("no <svg> root tag");
    std::string out = svg;
    out.insert(pos + 4, " " + attrs);
    return out;
}

std::string body_of(const std::string& svg) {
    const auto root = svg.find("<svg");
    if (root == std::string::npos) throw ImageDecodeError("no <svg> root tag");
    const auto open_end = svg.find('>', root);
    const auto close = svg.rfind("</svg>");
    if (open_end == std::string::npos || close == std::string::npos || close <= open_end)
        throw ImageDecodeError("malformed SVG document");
    return svg.substr(open_end + 1, close - open_end - 1);
}

std::size_t closing_tag_pos(const std::string& svg) {
    const auto pos = svg.rfind("</svg>");
    if (pos == std::string::npos) throw ImageDecodeError("no closing </svg> tag");
    return pos;
}

std::string to_string(const std::vector<std::uint8_t>& bytes) {
    return std::string(bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> to_bytes(const std::string& s) {
    return std::vector<std::uint8_t>(s.begin(), s.end());
}

}  // namespace svgdet

std::pair<int, int> svg_dimensions(const std::vector<std::uint8_t>& bytes) {
    const std::string svg = svgdet::to_string(bytes);
    const auto root = svg.find("<svg");
    if (root == std::string::npos) throw ImageDecodeError("no <svg> root tag");
    const auto open_end = svg.find('>', root);
    if (open_end == std::string::npos) throw ImageDecodeError("unterminated <svg> tag");
    const std::string tag = svg.substr(root, open_end - root);

    const auto attr = [&](const char* name) -> int {
        // Leading space avoids matching e.g. stroke-width.
        const std::string needle = std::string(" ") + name + "=\"";
        const auto pos = tag.find(needle);
        if (pos == std::string::npos)
            throw ImageDecodeError(std::string("SVG root missing ") + name + " attribute");
        const char* start = tag.c_str() + pos + needle.size();
        return static_cast<int>(std::strtod(start, nullptr));
    };
    return {attr("width"), attr("height")};
}

}  // namespace liquidsense
