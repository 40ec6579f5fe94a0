#include "spatial3d/token_codec.hpp"

#include "spatial3d/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace spatial3d {

bool in_range(const QuantBox& box)
{
    auto ok = [](int v) { return v >= 0 && v <= kGridMax; };
    return std::all_of(box.center.begin(), box.center.end(), ok) &&
           std::all_of(box.extent.begin(), box.extent.end(), ok);
}

bool within_grid(const QuantBox& box, double slack)
{
    for (std::size_t a = 0; a < 3; ++a) {
        const double half = box.extent[a] / 2.0;
        if (box.center[a] - half < -slack || box.center[a] + half > kGridMax + slack) {
            return false;
        }
    }
    return true;
}

// ---- quantization ----

QuantTransform::QuantTransform(const Point3& min, const Point3& max)
    : min_(min), max_(max)
{
    for (std::size_t a = 0; a < 3; ++a) {
        if (!std::isfinite(min[a]) || !std::isfinite(max[a])) {
            throw InvalidArgument("QuantTransform: non-finite bounds");
        }
        if (!(max[a] > min[a])) {
            throw InvalidArgument("QuantTransform: degenerate axis " + std::to_string(a) + " (max <= min)");
        }
    }
}

double QuantTransform::bin(std::size_t axis) const
{
    return (max_[axis] - min_[axis]) / kGridMax;
}

namespace {

int round_clamp(double v)
{
    const double r = std::floor(v + 0.5);
    if (!(r >= 0.0)) {
        return 0;
    }
    return r > kGridMax ? kGridMax : static_cast<int>(r);
}

} // namespace

int QuantTransform::quantize(double x, std::size_t axis) const
{
    return round_clamp(kGridMax * (x - min_[axis]) / (max_[axis] - min_[axis]));
}

double QuantTransform::dequantize(int u, std::size_t axis) const
{
    return min_[axis] + u * (max_[axis] - min_[axis]) / kGridMax;
}

int QuantTransform::quantize_extent(double e, std::size_t axis) const
{
    return round_clamp(kGridMax * e / (max_[axis] - min_[axis]));
}

double QuantTransform::dequantize_extent(int u, std::size_t axis) const
{
    return u * (max_[axis] - min_[axis]) / kGridMax;
}

GridTriple QuantTransform::quantize(const Point3& p) const
{
    return {quantize(p.x, 0), quantize(p.y, 1), quantize(p.z, 2)};
}

Point3 QuantTransform::dequantize(const GridTriple& u) const
{
    return {dequantize(u[0], 0), dequantize(u[1], 1), dequantize(u[2], 2)};
}

QuantBox QuantTransform::quantize(const Box3& box) const
{
    QuantBox q;
    q.center = quantize(box.center);
    for (std::size_t a = 0; a < 3; ++a) {
        q.extent[a] = quantize_extent(box.extent[a], a);
    }
    return q;
}

Box3 QuantTransform::dequantize(const QuantBox& box) const
{
    Box3 b;
    b.center = dequantize(box.center);
    for (std::size_t a = 0; a < 3; ++a) {
        b.extent[a] = dequantize_extent(box.extent[a], a);
    }
    return b;
}

QuantTransform fit_transform(const SceneBounds& bounds) { return QuantTransform(bounds.min, bounds.max); }

QuantTransform fit_transform(const SceneRecord& scene) { return fit_transform(effective_bounds(scene)); }

// ---- grammar ----

namespace {

constexpr std::string_view kLocOpen = "<loc>";
constexpr std::string_view kLocClose = "</loc>";
constexpr std::string_view kGapOpen = "<gap>";
constexpr std::string_view kGapClose = "</gap>";
constexpr std::string_view kSep = ", ";

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Cursor over a view; `base` is added to every reported position.
struct Cursor {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t base = 0;

    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, base + pos); }

    bool at(std::string_view s) const { return text.substr(pos, s.size()) == s; }

    void expect(std::string_view s)
    {
        if (!at(s)) {
            fail("expected '" + std::string(s) + "'");
        }
        pos += s.size();
    }

    int integer()
    {
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
            fail("signed value outside [0, 255]");
        }
        const std::size_t start = pos;
        while (pos < text.size() && is_digit(text[pos])) {
            ++pos;
        }
        const std::size_t len = pos - start;
        if (len == 0) {
            pos = start;
            fail("expected integer");
        }
        if (len > 1 && text[start] == '0') {
            pos = start;
            fail("leading zero");
        }
        if (len > 3) {
            pos = start;
            fail("value outside [0, 255]");
        }
        int v = 0;
        for (std::size_t i = start; i < pos; ++i) {
            v = v * 10 + (text[i] - '0');
        }
        if (v > kGridMax) {
            pos = start;
            fail("value outside [0, 255]");
        }
        return v;
    }

    QuantBox loc()
    {
        expect(kLocOpen);
        int values[6];
        for (int i = 0; i < 6; ++i) {
            if (i > 0) {
                if (at(kLocClose)) {
                    fail("loc has " + std::to_string(i) + " integers, expected 6");
                }
                expect(kSep);
            }
            values[i] = integer();
        }
        if (at(kSep)) {
            fail("loc has more than 6 integers");
        }
        expect(kLocClose);
        return QuantBox{{values[0], values[1], values[2]}, {values[3], values[4], values[5]}};
    }

    int gap()
    {
        expect(kGapOpen);
        const int v = integer();
        expect(kGapClose);
        return v;
    }

    GridTriple triple()
    {
        GridTriple t{};
        for (int i = 0; i < 3; ++i) {
            if (i > 0) {
                expect(kSep);
            }
            t[i] = integer();
        }
        return t;
    }

    void finish() const
    {
        if (pos != text.size()) {
            fail("trailing characters");
        }
    }
};

std::string join(const int* values, std::size_t n)
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            out += kSep;
        }
        out += std::to_string(values[i]);
    }
    return out;
}

void require_value(int v, const char* what)
{
    if (v < 0 || v > kGridMax) {
        throw InvalidArgument(std::string(what) + ": value " + std::to_string(v) + " outside [0, 255]");
    }
}

} // namespace

std::string emit_loc(const QuantBox& box)
{
    if (!in_range(box)) {
        throw InvalidArgument("emit_loc: component outside [0, 255]");
    }
    const int values[6] = {box.center[0], box.center[1], box.center[2], box.extent[0], box.extent[1], box.extent[2]};
    return std::string(kLocOpen) + join(values, 6) + std::string(kLocClose);
}

QuantBox parse_loc(std::string_view text)
{
    Cursor c{text};
    QuantBox b = c.loc();
    c.finish();
    return b;
}

std::string emit_gap(int value)
{
    require_value(value, "emit_gap");
    return std::string(kGapOpen) + std::to_string(value) + std::string(kGapClose);
}

int parse_gap(std::string_view text)
{
    Cursor c{text};
    const int v = c.gap();
    c.finish();
    return v;
}

std::string emit_triple(const GridTriple& t)
{
    for (int v : t) {
        require_value(v, "emit_triple");
    }
    return join(t.data(), 3);
}

GridTriple parse_triple(std::string_view text)
{
    Cursor c{text};
    const GridTriple t = c.triple();
    c.finish();
    return t;
}

// ---- answers ----

std::vector<QuantBox> AnswerPayload::boxes() const
{
    std::vector<QuantBox> out;
    for (const auto& item : items) {
        if (const auto* b = std::get_if<QuantBox>(&item)) {
            out.push_back(*b);
        }
    }
    return out;
}

std::vector<int> AnswerPayload::gaps() const
{
    std::vector<int> out;
    for (const auto& item : items) {
        if (const auto* g = std::get_if<Gap>(&item)) {
            out.push_back(g->value);
        }
    }
    return out;
}

std::vector<GridTriple> AnswerPayload::triples() const
{
    std::vector<GridTriple> out;
    for (const auto& item : items) {
        if (const auto* t = std::get_if<CenterTriple>(&item)) {
            out.push_back(t->value);
        }
    }
    return out;
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

bool is_clause_break(std::string_view text, std::size_t i)
{
    const char c = text[i];
    if (c == ';' || c == '\n') {
        return true;
    }
    if (c != '.') {
        return false;
    }
    const bool decimal = i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) && is_digit(text[i + 1]);
    return !decimal;
}

// Exactly "a, b, c" with canonical integers in range, or nothing.
std::optional<GridTriple> match_triple(std::string_view clause)
{
    std::size_t lo = 0;
    std::size_t hi = clause.size();
    while (lo < hi && is_space(clause[lo])) {
        ++lo;
    }
    while (hi > lo && is_space(clause[hi - 1])) {
        --hi;
    }
    try {
        return parse_triple(clause.substr(lo, hi - lo));
    } catch (const ParseError&) {
        return std::nullopt;
    }
}

struct Span {
    std::size_t begin;
    std::size_t end;
    AnswerItem item;
};

} // namespace

AnswerPayload parse_answer(std::string_view text)
{
    std::vector<Span> spans;
    std::size_t clause_begin = 0;
    bool clause_has_token = false;

    auto close_clause = [&](std::size_t end) {
        if (!clause_has_token) {
            if (auto t = match_triple(text.substr(clause_begin, end - clause_begin))) {
                spans.push_back({clause_begin, end, CenterTriple{*t}});
            }
        }
        clause_has_token = false;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        const std::string_view rest = text.substr(i);
        if (rest.starts_with(kLocOpen) || rest.starts_with(kGapOpen)) {
            const bool is_loc = rest.starts_with(kLocOpen);
            const std::string_view close = is_loc ? kLocClose : kGapClose;
            const std::size_t body = i + kLocOpen.size();
            // the token body may not contain another tag before its closer
            const std::size_t end = text.find(close, body);
            const std::size_t next_tag = text.find('<', body);
            if (end == std::string_view::npos) {
                throw ParseError(std::string(is_loc ? "unclosed <loc>" : "unclosed <gap>"), i);
            }
            if (next_tag < end) {
                throw ParseError("tag inside token", next_tag);
            }
            Cursor c{text.substr(i, end + close.size() - i), 0, i};
            AnswerItem item = is_loc ? AnswerItem{c.loc()} : AnswerItem{Gap{c.gap()}};
            c.finish();
            spans.push_back({i, end + close.size(), item});
            clause_has_token = true;
            i = end + close.size();
            continue;
        }
        if (rest.starts_with(kLocClose) || rest.starts_with(kGapClose)) {
            throw ParseError("stray closing tag", i);
        }
        if (is_clause_break(text, i)) {
            close_clause(i);
            clause_begin = i + 1;
        }
        ++i;
    }
    close_clause(text.size());

    std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
    AnswerPayload out;
    std::size_t cursor = 0;
    for (const auto& s : spans) {
        out.residual.append(text.substr(cursor, s.begin - cursor));
        out.items.push_back(s.item);
        cursor = s.end;
    }
    out.residual.append(text.substr(cursor));
    return out;
}

} // namespace spatial3d
