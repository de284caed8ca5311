#pragma once

#include <string>
#include <vector>

namespace liquidsense::svgdet {

/// Fixed two-decimal float formatting for deterministic SVG output.
std::string num(double v);

std::string open_tag(int width, int height);

/// Drop a leading <?xml ...?> declaration if present.
std::string strip_decl(const std::string& svg);

/// Insert an attribute string right after the root "<svg" token.
std::string inject_root_attrs(const std::string& svg, const std::string& attrs);

/// Body of the document: everything between the root tag and "</svg>".
std::string body_of(const std::string& svg);

/// Position of the final "</svg>" (for appending elements).
std::size_t closing_tag_pos(const std::string& svg);

std::string to_string(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> to_bytes(const std::string& s);

}  // namespace liquidsense::svgdet
