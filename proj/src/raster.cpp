#include "cursiveseg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cursiveseg/error.hpp"

namespace cseg {

namespace {

void check_dims(int width, int height, int min_dim, const char* what) {
    if (width < min_dim || height < min_dim) {
        throw ContractError(std::string(what) + ": invalid dimensions " + std::to_string(width) +
                            "x" + std::to_string(height));
    }
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
    check_dims(width, height, 1, "GrayImage");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height, 1, "GrayImage");
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw ContractError("GrayImage: data length does not match dimensions");
    }
}

std::size_t GrayImage::index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
}

BinaryImage::BinaryImage(int width, int height) : width_(width), height_(height) {
    check_dims(width, height, 0, "BinaryImage");
    data_.assign(static_cast<std::size_t>(width) * height, 0);
}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    check_dims(width, height, 0, "BinaryImage");
    if (data_.size() != static_cast<std::size_t>(width) * height) {
        throw ContractError("BinaryImage: data length does not match dimensions");
    }
    if (std::any_of(data_.begin(), data_.end(), [](std::uint8_t v) { return v > 1; })) {
        throw ContractError("BinaryImage: values must be 0 or 1");
    }
}

std::size_t BinaryImage::index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
}

std::size_t BinaryImage::foreground_count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

BinaryImage BinaryImage::columns(int begin, int end) const {
    if (begin < 0 || end > width_ || begin > end) {
        throw ContractError("BinaryImage::columns: range out of bounds");
    }
    BinaryImage out(end - begin, height_);
    for (int y = 0; y < height_; ++y) {
        for (int x = begin; x < end; ++x) out.set(x - begin, y, at(x, y));
    }
    return out;
}

std::uint64_t Histogram256::total() const {
    std::uint64_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

Histogram256 histogram(const GrayImage& image) {
    Histogram256 h;
    for (auto v : image.pixels()) ++h.counts[v];
    return h;
}

namespace {

// sigma_B^2 = w0 * w1 * (mu0 - mu1)^2 from integer class moments. Both the
// exhaustive evaluator and the Otsu sweep go through here so equal splits
// give bit-identical scores.
double variance_from_moments(std::uint64_t n0, std::uint64_t s0, std::uint64_t n,
                             std::uint64_t s) {
    const std::uint64_t n1 = n - n0;
    if (n0 == 0 || n1 == 0) return 0.0;
    const double mu0 = static_cast<double>(s0) / static_cast<double>(n0);
    const double mu1 = static_cast<double>(s - s0) / static_cast<double>(n1);
    const double w0 = static_cast<double>(n0) / static_cast<double>(n);
    const double w1 = static_cast<double>(n1) / static_cast<double>(n);
    const double d = mu0 - mu1;
    return w0 * w1 * d * d;
}

}  // namespace

double between_class_variance(const Histogram256& hist, int t) {
    if (t < 0 || t > 255) throw ContractError("between_class_variance: level out of range");
    std::uint64_t n0 = 0, s0 = 0, n = 0, s = 0;
    for (int v = 0; v < 256; ++v) {
        const std::uint64_t c = hist.counts[v];
        n += c;
        s += c * static_cast<std::uint64_t>(v);
        if (v <= t) {
            n0 += c;
            s0 += c * static_cast<std::uint64_t>(v);
        }
    }
    return variance_from_moments(n0, s0, n, s);
}

OtsuResult otsu_threshold(const Histogram256& hist) {
    std::uint64_t n = 0, s = 0;
    int distinct = 0;
    int only_level = 0;
    for (int v = 0; v < 256; ++v) {
        const std::uint64_t c = hist.counts[v];
        if (c > 0) {
            ++distinct;
            only_level = v;
        }
        n += c;
        s += c * static_cast<std::uint64_t>(v);
    }
    if (n == 0) throw ContractError("otsu_threshold: empty histogram");
    if (distinct == 1) {
        return {static_cast<std::uint8_t>(only_level), true, 0.0};
    }

    OtsuResult best;
    best.variance = -1.0;
    std::uint64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 256; ++t) {
        n0 += hist.counts[t];
        s0 += hist.counts[t] * static_cast<std::uint64_t>(t);
        const double var = variance_from_moments(n0, s0, n, s);
        if (var > best.variance) {
            best.variance = var;
            best.level = static_cast<std::uint8_t>(t);
        }
    }
    return best;
}

OtsuResult otsu_threshold(const GrayImage& image) {
    return otsu_threshold(histogram(image));
}

BinaryImage binarize(const GrayImage& image, std::uint8_t threshold, InkPolarity polarity) {
    std::vector<std::uint8_t> out(image.pixels().size());
    std::transform(image.pixels().begin(), image.pixels().end(), out.begin(),
                   [&](std::uint8_t v) -> std::uint8_t {
                       const bool dark = v <= threshold;
                       return (polarity == InkPolarity::Dark) == dark ? 1 : 0;
                   });
    return BinaryImage(image.width(), image.height(), std::move(out));
}

namespace {

double tan_degrees(double degrees) {
    return std::tan(degrees * std::numbers::pi / 180.0);
}

int sheared_column(int x, int k, double slope) {
    return static_cast<int>(std::lround(x + k * slope));
}

}  // namespace

ShearGeometry shear_geometry(int width, int height, double degrees) {
    if (std::abs(degrees) > kMaxSlantDegrees) {
        throw ContractError("shear: angle outside [-45, 45] degrees");
    }
    if (width == 0 || height == 0) return {0, width};
    const double slope = tan_degrees(degrees);
    int lo = 0, hi = width - 1;
    for (int k = 0; k < height; ++k) {
        lo = std::min(lo, sheared_column(0, k, slope));
        hi = std::max(hi, sheared_column(width - 1, k, slope));
    }
    return {-lo, hi - lo + 1};
}

BinaryImage shear(const BinaryImage& image, double degrees) {
    const ShearGeometry geo = shear_geometry(image.width(), image.height(), degrees);
    const double slope = tan_degrees(degrees);
    BinaryImage out(geo.width, image.height());
    for (int y = 0; y < image.height(); ++y) {
        const int k = image.height() - 1 - y;
        for (int x = 0; x < image.width(); ++x) {
            if (image.at(x, y)) out.set(sheared_column(x, k, slope) + geo.offset, y, 1);
        }
    }
    return out;
}

int slant_score(const BinaryImage& image, int degrees) {
    const ShearGeometry geo = shear_geometry(image.width(), image.height(), degrees);
    const double slope = tan_degrees(degrees);
    std::vector<char> inked(static_cast<std::size_t>(geo.width), 0);
    int inked_count = 0;
    for (int y = 0; y < image.height(); ++y) {
        const int k = image.height() - 1 - y;
        for (int x = 0; x < image.width(); ++x) {
            if (!image.at(x, y)) continue;
            char& mark = inked[static_cast<std::size_t>(sheared_column(x, k, slope) + geo.offset)];
            if (!mark) {
                mark = 1;
                ++inked_count;
            }
        }
    }
    const int canvas = image.width() + std::max(image.height() - 1, 0);
    return canvas - inked_count;
}

int estimate_slant(const BinaryImage& image) {
    // Visiting 0, -1, +1, -2, +2, ... and only replacing on a strictly better
    // score realizes the tie-break order.
    int best_angle = 0;
    int best_score = slant_score(image, 0);
    for (int mag = 1; mag <= kMaxSlantDegrees; ++mag) {
        for (int angle : {-mag, mag}) {
            const int score = slant_score(image, angle);
            if (score > best_score) {
                best_score = score;
                best_angle = angle;
            }
        }
    }
    return best_angle;
}

namespace {

struct Neighbourhood {
    // p[0] = P2 (north), clockwise through p[7] = P9 (north-west).
    std::array<std::uint8_t, 8> p{};

    int count() const {
        int b = 0;
        for (auto v : p) b += v;
        return b;
    }

    int transitions() const {
        int a = 0;
        for (int i = 0; i < 8; ++i) {
            if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
        }
        return a;
    }
};

Neighbourhood neighbourhood(const BinaryImage& img, int x, int y) {
    return {{img.at_or_zero(x, y - 1), img.at_or_zero(x + 1, y - 1), img.at_or_zero(x + 1, y),
             img.at_or_zero(x + 1, y + 1), img.at_or_zero(x, y + 1), img.at_or_zero(x - 1, y + 1),
             img.at_or_zero(x - 1, y), img.at_or_zero(x - 1, y - 1)}};
}

bool deletable(const Neighbourhood& n, int subiteration) {
    const int b = n.count();
    if (b < 2 || b > 6) return false;
    if (n.transitions() != 1) return false;
    const auto p2 = n.p[0], p4 = n.p[2], p6 = n.p[4], p8 = n.p[6];
    if (subiteration == 0) return p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0;
    return p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0;
}

// Simple point in the (8, 4) sense: exactly one 8-connected foreground
// component among the neighbours and exactly one 4-connected background
// component touching the pixel's 4-neighbours.
bool is_simple(const Neighbourhood& n) {
    static constexpr int dx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
    static constexpr int dy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    const auto components = [&](std::uint8_t value, bool eight, bool only_touching_edges) {
        std::array<bool, 8> seen{};
        int count = 0;
        for (int start = 0; start < 8; ++start) {
            if (seen[start] || n.p[start] != value) continue;
            bool touches = false;
            std::array<int, 8> stack{};
            int top = 0;
            stack[top++] = start;
            seen[start] = true;
            while (top > 0) {
                const int i = stack[--top];
                if (i % 2 == 0) touches = true;  // even slots are N, E, S, W
                for (int j = 0; j < 8; ++j) {
                    if (seen[j] || n.p[j] != value) continue;
                    const int ax = std::abs(dx[i] - dx[j]), ay = std::abs(dy[i] - dy[j]);
                    const bool adjacent = eight ? std::max(ax, ay) == 1 : ax + ay == 1;
                    if (adjacent) {
                        seen[j] = true;
                        stack[top++] = j;
                    }
                }
            }
            if (!only_touching_edges || touches) ++count;
        }
        return count;
    };
    return components(1, true, false) == 1 && components(0, false, true) == 1;
}

// One Zhang-Suen subiteration: flag in parallel, then delete flagged pixels
// in raster order while they remain simple.
bool thinning_pass(BinaryImage& img, int subiteration) {
    std::vector<std::pair<int, int>> marked;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (img.at(x, y) && deletable(neighbourhood(img, x, y), subiteration)) {
                marked.emplace_back(x, y);
            }
        }
    }
    bool changed = false;
    for (auto [x, y] : marked) {
        if (is_simple(neighbourhood(img, x, y))) {
            img.set(x, y, 0);
            changed = true;
        }
    }
    return changed;
}

}  // namespace

BinaryImage thin(const BinaryImage& image) {
    BinaryImage img = image;
    for (;;) {
        const bool first = thinning_pass(img, 0);
        const bool second = thinning_pass(img, 1);
        if (!first && !second) break;
    }
    return img;
}

}  // namespace cseg
