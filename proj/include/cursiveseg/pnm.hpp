#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cursiveseg/raster.hpp"

namespace cseg {

// Binary PGM (P5, maxval 255). Header comments are accepted on input; output
// always uses the canonical "P5\n<w> <h>\n255\n" header.
GrayImage load_gray(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_gray(const GrayImage& image);

GrayImage read_gray_file(const std::filesystem::path& path);
void write_gray_file(const std::filesystem::path& path, const GrayImage& image);

// Ink rendered black (0) on white (255).
GrayImage to_gray(const BinaryImage& image);

// Plain-text PBM (P1) dump, 1 = ink; used for debugging output.
std::string to_plain_pbm(const BinaryImage& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace cseg
