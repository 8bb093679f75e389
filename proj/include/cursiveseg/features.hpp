#pragma once

#include <vector>

#include "cursiveseg/raster.hpp"

namespace cseg {

// Input window for the segmentation-point validator: `window_width` columns
// centred on the candidate, the whole word height resampled to
// `normalized_height` rows. The default 9x29 gives 261 inputs.
struct WindowConfig {
    int window_width = 9;
    int normalized_height = 29;

    int input_size() const { return window_width * normalized_height; }
    void validate() const;

    friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

// Row-major window values in [0, 1].
using FeatureVector = std::vector<double>;

FeatureVector extract_window(const BinaryImage& image, int column, const WindowConfig& cfg = {});

}  // namespace cseg
