#include <algorithm>
#include <sstream>

#include "cursiveseg/corpus.hpp"
#include "cursiveseg/error.hpp"
#include "cursiveseg/pnm.hpp"

namespace cseg {

const char* to_string(GlyphClass c) {
    switch (c) {
        case GlyphClass::Loop: return "loop";
        case GlyphClass::SemiLoop: return "semi-loop";
        case GlyphClass::Ligature: return "ligature";
    }
    return "?";
}

std::optional<GlyphClass> parse_glyph_class(std::string_view s) {
    if (s == "loop") return GlyphClass::Loop;
    if (s == "semi-loop") return GlyphClass::SemiLoop;
    if (s == "ligature") return GlyphClass::Ligature;
    return std::nullopt;
}

void GlyphSet::add(Glyph glyph) {
    if (glyph.name.empty()) throw InputError("glyph with empty name");
    if (glyph.image.foreground_count() == 0) throw InputError("glyph '" + glyph.name + "' has no ink");
    if (find(glyph.name)) throw InputError("duplicate glyph '" + glyph.name + "'");
    glyphs_.push_back(std::move(glyph));
}

const Glyph* GlyphSet::find(std::string_view name) const {
    for (const auto& g : glyphs_) {
        if (g.name == name) return &g;
    }
    return nullptr;
}

std::vector<std::string> GlyphSet::names(std::optional<GlyphClass> shape) const {
    std::vector<std::string> out;
    for (const auto& g : glyphs_) {
        if (!shape || g.shape == *shape) out.push_back(g.name);
    }
    return out;
}

namespace {

// Body occupies rows [8, 22); ascenders start at row 0, descenders end at 26.
constexpr int kCanvasRows = 26;
constexpr int kBodyTop = 8;
constexpr int kBodyBottom = 22;
constexpr int kStroke = 2;

class Sketch {
public:
    explicit Sketch(int width) : img_(width, kCanvasRows) {}

    Sketch& fill(int x0, int x1, int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) img_.set(x, y, 1);
        }
        return *this;
    }

    Sketch& clear(int x, int y) {
        img_.set(x, y, 0);
        return *this;
    }

    // Closed ring over columns [x0, x1) and rows [y0, y1), corners rounded.
    Sketch& ring(int x0, int x1, int y0, int y1) {
        fill(x0, x1, y0, y0 + kStroke);
        fill(x0, x1, y1 - kStroke, y1);
        fill(x0, x0 + kStroke, y0, y1);
        fill(x1 - kStroke, x1, y0, y1);
        return clear(x0, y0).clear(x1 - 1, y0).clear(x0, y1 - 1).clear(x1 - 1, y1 - 1);
    }

    // Ring with the right (open_right) or left side missing.
    Sketch& cup(int x0, int x1, int y0, int y1, bool open_right) {
        fill(x0, x1, y0, y0 + kStroke);
        fill(x0, x1, y1 - kStroke, y1);
        if (open_right) {
            fill(x0, x0 + kStroke, y0, y1);
            return clear(x0, y0).clear(x0, y1 - 1);
        }
        fill(x1 - kStroke, x1, y0, y1);
        return clear(x1 - 1, y0).clear(x1 - 1, y1 - 1);
    }

    BinaryImage take() { return std::move(img_); }

private:
    BinaryImage img_;
};

GlyphSet make_builtin() {
    GlyphSet set;
    const auto add = [&](const char* name, GlyphClass shape, Sketch s) {
        set.add({name, shape, s.take()});
    };
    constexpr int T = kBodyTop, B = kBodyBottom;

    add("ha", GlyphClass::Loop, std::move(Sketch(10).ring(0, 10, T, B)));
    add("sad", GlyphClass::Loop, std::move(Sketch(14).ring(0, 14, 12, B)));
    add("ta", GlyphClass::Loop, std::move(Sketch(10).ring(0, 10, T, B).fill(0, kStroke, 0, B)));
    add("waw", GlyphClass::Loop, std::move(Sketch(9).ring(0, 9, T, 18).fill(7, 9, T + 1, kCanvasRows)));

    add("ain", GlyphClass::SemiLoop, std::move(Sketch(10).cup(0, 10, T, B, true)));
    add("dal", GlyphClass::SemiLoop, std::move(Sketch(9).cup(0, 9, T, B, false)));
    add("kaf", GlyphClass::SemiLoop, std::move(Sketch(10).cup(0, 10, T, B, true).fill(0, kStroke, 0, B)));

    // Open letters: two bowls joined by a thin internal stroke, which the
    // column profile cannot tell apart from a ligature between letters.
    add("sin", GlyphClass::Ligature,
        std::move(Sketch(21).ring(0, 8, T, B).fill(8, 13, T, T + kStroke).ring(13, 21, T, B)));
    add("mim", GlyphClass::Ligature,
        std::move(Sketch(21).ring(0, 8, T, B).fill(8, 13, 14, 14 + kStroke).cup(13, 21, T, B, true)));
    add("lam", GlyphClass::Ligature,
        std::move(Sketch(24)
                      .ring(0, 8, T, B)
                      .fill(8, 16, B - kStroke, B)
                      .fill(11, 11 + kStroke, 0, B)
                      .ring(16, 24, T, B)));
    return set;
}

}  // namespace

const GlyphSet& builtin_glyphs() {
    static const GlyphSet set = make_builtin();
    return set;
}

GlyphSet parse_glyph_set(std::string_view text) {
    GlyphSet set;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;

    std::string name;
    GlyphClass shape = GlyphClass::Loop;
    std::vector<std::string> rows;
    int header_line = 0;

    const auto flush = [&] {
        if (name.empty()) return;
        if (rows.empty()) throw InputError("glyph '" + name + "' (line " + std::to_string(header_line) + ") has no rows");
        std::size_t width = 0;
        for (const auto& r : rows) width = std::max(width, r.size());
        BinaryImage img(static_cast<int>(width), static_cast<int>(rows.size()));
        for (std::size_t y = 0; y < rows.size(); ++y) {
            for (std::size_t x = 0; x < rows[y].size(); ++x) {
                if (rows[y][x] == '#') img.set(static_cast<int>(x), static_cast<int>(y), 1);
            }
        }
        set.add({name, shape, std::move(img)});
        name.clear();
        rows.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line[0] == ';') continue;
        if (line.rfind("glyph ", 0) == 0) {
            flush();
            std::istringstream hdr(line.substr(6));
            std::string cls;
            hdr >> name >> cls;
            header_line = line_no;
            const auto parsed = parse_glyph_class(cls);
            if (name.empty() || !parsed) {
                throw InputError("glyph set line " + std::to_string(line_no) +
                                 ": expected 'glyph <name> <loop|semi-loop|ligature>'");
            }
            shape = *parsed;
        } else if (line.find_first_not_of(" \t") == std::string::npos) {
            flush();
        } else {
            if (name.empty()) {
                throw InputError("glyph set line " + std::to_string(line_no) + ": raster row outside a glyph block");
            }
            rows.push_back(line);
        }
    }
    flush();
    if (set.empty()) throw InputError("glyph set contains no glyphs");
    return set;
}

GlyphSet load_glyph_set(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    return parse_glyph_set(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace cseg
