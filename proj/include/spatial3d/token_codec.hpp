#pragma once

// Quantized location tokens.
//
//   <loc>cx, cy, cz, w, h, l</loc>   six integers in [0, 255]
//   <gap>v</gap>                     one integer in [0, 255]
//   cx, cy, cz                       bare center triple (placement answers)
//
// Integers are canonical decimal: no sign, no leading zeros, no spaces other
// than the single space after each comma.

#include "spatial3d/geometry.hpp"
#include "spatial3d/scene.hpp"

#include <array>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spatial3d {

inline constexpr int kGridMax = 255;

using GridTriple = std::array<int, 3>;

struct QuantBox {
    GridTriple center{};
    GridTriple extent{};  // w, h, l along x, y, z

    bool operator==(const QuantBox&) const = default;
};

/// True when every component is in [0, 255].
bool in_range(const QuantBox& box);

/// True when center +- extent/2 stays inside [-slack, 255 + slack] on every axis.
bool within_grid(const QuantBox& box, double slack = 1.0);

/// Per-axis affine map from metric coordinates to the [0, 255] grid.
class QuantTransform {
public:
    QuantTransform(const Point3& min, const Point3& max);

    const Point3& min() const { return min_; }
    const Point3& max() const { return max_; }
    /// Metric size of one grid unit on an axis.
    double bin(std::size_t axis) const;

    /// floor(255 (x - min) / (max - min) + 0.5), clamped to [0, 255].
    int quantize(double x, std::size_t axis) const;
    double dequantize(int u, std::size_t axis) const;
    /// Same scale as quantize, no offset.
    int quantize_extent(double e, std::size_t axis) const;
    double dequantize_extent(int u, std::size_t axis) const;

    GridTriple quantize(const Point3& p) const;
    Point3 dequantize(const GridTriple& u) const;
    QuantBox quantize(const Box3& box) const;
    Box3 dequantize(const QuantBox& box) const;

private:
    Point3 min_;
    Point3 max_;
};

QuantTransform fit_transform(const SceneBounds& bounds);
/// Uses effective_bounds(scene).
QuantTransform fit_transform(const SceneRecord& scene);

std::string emit_loc(const QuantBox& box);
QuantBox parse_loc(std::string_view text);

std::string emit_gap(int value);
int parse_gap(std::string_view text);

/// "cx, cy, cz"
std::string emit_triple(const GridTriple& t);
GridTriple parse_triple(std::string_view text);

struct Gap {
    int value = 0;
    bool operator==(const Gap&) const = default;
};

struct CenterTriple {
    GridTriple value{};
    bool operator==(const CenterTriple&) const = default;
};

using AnswerItem = std::variant<QuantBox, Gap, CenterTriple>;

struct AnswerPayload {
    std::vector<AnswerItem> items;
    /// Input text with every recognized item removed.
    std::string residual;

    std::vector<QuantBox> boxes() const;
    std::vector<int> gaps() const;
    std::vector<GridTriple> triples() const;
    bool empty() const { return items.empty(); }
};

/// Scans free text for loc tokens, gap tokens and bare center triples.
///
/// A bare triple counts only when it is a whole clause: the trimmed text
/// between clause breaks ('.', ';', newline, or the text ends), with no token
/// inside the clause. A '.' between two digits is a decimal point, not a break.
/// Unclosed, nested or stray closing tags throw ParseError.
AnswerPayload parse_answer(std::string_view text);

} // namespace spatial3d
