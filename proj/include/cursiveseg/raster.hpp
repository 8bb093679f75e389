#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace cseg {

// 8-bit grayscale raster, row-major. 0 is black ink, 255 is white paper.
class GrayImage {
public:
    GrayImage(int width, int height, std::uint8_t fill = 255);
    GrayImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { data_[index(x, y)] = v; }

    std::span<const std::uint8_t> pixels() const { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const;

    int width_;
    int height_;
    std::vector<std::uint8_t> data_;
};

// Bi-level raster, row-major, 1 = foreground (ink). Zero-sized images are
// allowed so that column slices of a word can be represented uniformly.
class BinaryImage {
public:
    BinaryImage() : BinaryImage(0, 0) {}
    BinaryImage(int width, int height);
    BinaryImage(int width, int height, std::vector<std::uint8_t> data);

    int width() const { return width_; }
    int height() const { return height_; }

    std::uint8_t at(int x, int y) const { return data_[index(x, y)]; }
    void set(int x, int y, std::uint8_t v) { data_[index(x, y)] = v ? 1 : 0; }

    // Out-of-bounds reads are background.
    std::uint8_t at_or_zero(int x, int y) const {
        return (x < 0 || y < 0 || x >= width_ || y >= height_) ? 0 : data_[index(x, y)];
    }

    std::span<const std::uint8_t> pixels() const { return data_; }
    std::size_t foreground_count() const;

    // Columns [begin, end) as a new image of the same height.
    BinaryImage columns(int begin, int end) const;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    std::size_t index(int x, int y) const;

    int width_;
    int height_;
    std::vector<std::uint8_t> data_;
};

struct Histogram256 {
    std::array<std::uint64_t, 256> counts{};

    std::uint64_t total() const;
};

Histogram256 histogram(const GrayImage& image);

// Between-class variance of splitting the histogram into levels <= t and > t.
// Zero when either class is empty.
double between_class_variance(const Histogram256& hist, int t);

struct OtsuResult {
    std::uint8_t level = 0;
    // Single-intensity histogram: level is that intensity and no split exists.
    bool degenerate = false;
    double variance = 0.0;
};

// Global Otsu threshold. Among levels that maximize the between-class
// variance the smallest one is returned.
OtsuResult otsu_threshold(const Histogram256& hist);
OtsuResult otsu_threshold(const GrayImage& image);

enum class InkPolarity {
    Dark,   // ink is <= threshold
    Light,  // ink is > threshold (light-on-dark scans)
};

BinaryImage binarize(const GrayImage& image, std::uint8_t threshold,
                     InkPolarity polarity = InkPolarity::Dark);

// Placement of a horizontal shear about the bottom row. Source pixel (x, y)
// lands at column round(x + (height-1-y) * tan(angle)) + offset.
struct ShearGeometry {
    int offset = 0;
    int width = 0;
};

ShearGeometry shear_geometry(int width, int height, double degrees);
BinaryImage shear(const BinaryImage& image, double degrees);

inline constexpr int kMaxSlantDegrees = 45;

// Blank-column count of the image sheared by `degrees`, measured on the
// widest canvas any candidate angle can produce (width + height - 1) so that
// scores of different angles are comparable.
int slant_score(const BinaryImage& image, int degrees);

// Corrective shear angle in whole degrees within [-45, 45]: the angle with
// the highest slant_score, ties going to the smallest magnitude and then to
// the negative side. A blank image yields 0.
int estimate_slant(const BinaryImage& image);

// Zhang-Suen two-subiteration thinning, iterated until stable. Pixels flagged
// by a subiteration are removed in raster order, each only if it is still a
// simple point at that moment, so 2x2 blocks and two-pixel diagonals keep a
// pixel instead of vanishing.
BinaryImage thin(const BinaryImage& image);

}  // namespace cseg
