#include "cursiveseg/features.hpp"

#include <string>

#include "cursiveseg/error.hpp"

namespace cseg {

void WindowConfig::validate() const {
    if (window_width < 1 || window_width % 2 == 0) {
        throw ConfigError("window width must be odd and >= 1, got " + std::to_string(window_width));
    }
    if (normalized_height < 1) {
        throw ConfigError("normalized height must be >= 1, got " + std::to_string(normalized_height));
    }
}

FeatureVector extract_window(const BinaryImage& image, int column, const WindowConfig& cfg) {
    cfg.validate();
    if (column < 0 || column >= image.width()) {
        throw ContractError("extract_window: column " + std::to_string(column) + " outside image");
    }
    const int half = cfg.window_width / 2;
    const int rows = cfg.normalized_height;
    FeatureVector out(static_cast<std::size_t>(cfg.input_size()), 0.0);
    for (int r = 0; r < rows; ++r) {
        // nearest source row for the centre of output row r
        const int src_y = static_cast<int>((2LL * r + 1) * image.height() / (2LL * rows));
        for (int i = 0; i < cfg.window_width; ++i) {
            out[static_cast<std::size_t>(r) * cfg.window_width + i] =
                image.at_or_zero(column - half + i, src_y);
        }
    }
    return out;
}

}  // namespace cseg
