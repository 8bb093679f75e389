#include <doctest.h>

#include <random>
#include <string>

#include "cursiveseg/error.hpp"
#include "cursiveseg/pnm.hpp"
#include "oracles.hpp"

using namespace cseg;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("load_gray decodes a minimal P5") {
    auto b = bytes_of("P5 2 1 255\n");
    b.push_back(0);
    b.push_back(255);
    const auto img = load_gray(b);
    CHECK(img.width() == 2);
    CHECK(img.height() == 1);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 0) == 255);
}

TEST_CASE("load_gray accepts header comments") {
    auto b = bytes_of("P5\n# scanner output\n3 # width\n1\n255\n");
    b.insert(b.end(), {1, 2, 3});
    const auto img = load_gray(b);
    CHECK(img.width() == 3);
    CHECK(img.at(2, 0) == 3);
}

TEST_CASE("load_gray rejects malformed input with the offending field") {
    CHECK_THROWS_AS(load_gray({}), DecodeError);
    CHECK_THROWS_WITH_AS(load_gray(bytes_of("P2 1 1 255\n0")), doctest::Contains("magic"), DecodeError);
    CHECK_THROWS_WITH_AS(load_gray(bytes_of("P5 x 1 255\n\x01")), doctest::Contains("width"), DecodeError);
    CHECK_THROWS_WITH_AS(load_gray(bytes_of("P5 1 0 255\n")), doctest::Contains("height"), DecodeError);
    CHECK_THROWS_WITH_AS(load_gray(bytes_of("P5 1 1 65535\n\x01\x01")), doctest::Contains("maxval"), DecodeError);
    CHECK_THROWS_WITH_AS(load_gray(bytes_of("P5 2 2 255\n\x01")), doctest::Contains("raster"), DecodeError);
    CHECK_THROWS_WITH_AS(load_gray(bytes_of("P5 1 1 255")), doctest::Contains("offset 10"), DecodeError);
}

TEST_CASE("save_gray and load_gray round trip") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 30; ++i) {
        const auto img = oracle::random_gray(rng);
        const auto bytes = save_gray(img);
        CHECK(load_gray(bytes) == img);
        CHECK(save_gray(load_gray(bytes)) == bytes);
    }
}

TEST_CASE("to_gray and plain PBM") {
    BinaryImage b(3, 2);
    b.set(0, 0, 1);
    b.set(2, 1, 1);
    const auto g = to_gray(b);
    CHECK(g.at(0, 0) == 0);
    CHECK(g.at(1, 0) == 255);
    CHECK(to_plain_pbm(b) == "P1\n3 2\n1 0 0\n0 0 1\n");
}

TEST_CASE("file helpers report missing files as input errors") {
    CHECK_THROWS_AS(read_gray_file("/nonexistent/dir/word.pgm"), InputError);
}
