#pragma once

// Little-endian helpers shared by the binary container formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cursiveseg/error.hpp"

namespace cseg::detail {

class ByteWriter {
public:
    void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }

    template <typename T>
    void uint(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> in, std::string what) : in_(in), what_(std::move(what)) {}

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return in_.size() - pos_; }

    void expect_magic(std::string_view magic) {
        need(magic.size(), "magic");
        if (std::memcmp(in_.data() + pos_, magic.data(), magic.size()) != 0) {
            fail("magic", "unrecognized file signature");
        }
        pos_ += magic.size();
    }

    template <typename T>
    T uint(const char* field) {
        need(sizeof(T), field);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in_[pos_ + i]) << (8 * i);
        pos_ += sizeof(T);
        return v;
    }

    double f64(const char* field) { return std::bit_cast<double>(uint<std::uint64_t>(field)); }
    float f32(const char* field) { return std::bit_cast<float>(uint<std::uint32_t>(field)); }

    std::string str(std::size_t n, const char* field) {
        need(n, field);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    void need(std::size_t n, const char* field) {
        if (remaining() < n) fail(field, "truncated input");
    }

    [[noreturn]] void fail(const char* field, const std::string& why) const {
        throw DecodeError(what_ + ": " + why + " (field '" + field + "' at offset " +
                          std::to_string(pos_) + ")");
    }

private:
    std::span<const std::uint8_t> in_;
    std::string what_;
    std::size_t pos_ = 0;
};

}  // namespace cseg::detail
