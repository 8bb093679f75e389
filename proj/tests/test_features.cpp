#include <doctest.h>

#include <random>

#include "cursiveseg/error.hpp"
#include "cursiveseg/features.hpp"
#include "oracles.hpp"

using namespace cseg;

TEST_CASE("window config") {
    CHECK(WindowConfig{}.input_size() == 261);
    CHECK_THROWS_AS((WindowConfig{0, 29}.validate()), ConfigError);
    CHECK_THROWS_AS((WindowConfig{9, 0}.validate()), ConfigError);
}

TEST_CASE("extract_window trivial images") {
    const auto blank = extract_window(BinaryImage(20, 30), 7);
    CHECK(blank.size() == 261);
    CHECK(std::all_of(blank.begin(), blank.end(), [](double v) { return v == 0.0; }));

    BinaryImage full(20, 30);
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 20; ++x) full.set(x, y, 1);
    const auto ones = extract_window(full, 10);
    CHECK(std::all_of(ones.begin(), ones.end(), [](double v) { return v == 1.0; }));

    CHECK_THROWS_AS(extract_window(full, 20), ContractError);
}

TEST_CASE("extract_window single pixel at the top of the centre column") {
    BinaryImage img(15, 29);
    img.set(6, 0, 1);
    const auto f = extract_window(img, 6);
    // Row 0, centre of a 9-wide window: index 0 * 9 + 4.
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == (i == 4 ? 1.0 : 0.0));
}

TEST_CASE("extract_window is translation equivariant and bi-level") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 30; ++i) {
        const int w = oracle::uniform(rng, 30, 60), h = oracle::uniform(rng, 5, 50);
        const auto img = oracle::random_binary(rng, w, h, 0.3);
        const int delta = oracle::uniform(rng, 1, 8);
        BinaryImage moved(w + delta, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) moved.set(x + delta, y, img.at(x, y));
        const WindowConfig cfg{oracle::uniform(rng, 1, 6) * 2 + 1, oracle::uniform(rng, 10, 40)};
        const int col = oracle::uniform(rng, cfg.window_width, w - cfg.window_width);
        const auto a = extract_window(img, col, cfg);
        const auto b = extract_window(moved, col + delta, cfg);
        CHECK(a.size() == static_cast<std::size_t>(cfg.input_size()));
        CHECK(a == b);
        CHECK(std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0 || v == 1.0; }));
    }
}

TEST_CASE("extract_window resamples rows by nearest neighbour") {
    // Height 58 -> 29: output row r reads source row 2r + 1.
    BinaryImage img(9, 58);
    for (int y = 1; y < 58; y += 4) img.set(4, y, 1);
    const auto f = extract_window(img, 4);
    for (int r = 0; r < 29; ++r) {
        const int src = 2 * r + 1;
        CHECK(f[static_cast<std::size_t>(r) * 9 + 4] == ((src - 1) % 4 == 0 ? 1.0 : 0.0));
    }
}
