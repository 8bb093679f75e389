#include "cursiveseg/pnm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cursiveseg/error.hpp"

namespace cseg {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const auto c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_number(const char* field) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000'000L) fail(field, start, "value too large");
            ++pos_;
        }
        if (pos_ == start) fail(field, start, "expected a decimal number");
        return value;
    }

    [[noreturn]] void fail(const char* field, std::size_t at, const std::string& why) const {
        std::ostringstream os;
        os << "PGM decode error: field '" << field << "' at offset " << at << ": " << why;
        throw DecodeError(os.str());
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

GrayImage load_gray(std::span<const std::uint8_t> bytes) {
    HeaderReader r(bytes);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        r.fail("magic", 0, "expected 'P5'");
    }
    r.pos_ = 2;
    const long width = r.read_number("width");
    const long height = r.read_number("height");
    const std::size_t maxval_at = r.offset();
    const long maxval = r.read_number("maxval");
    if (width < 1) r.fail("width", maxval_at, "must be >= 1");
    if (height < 1) r.fail("height", maxval_at, "must be >= 1");
    if (maxval != 255) r.fail("maxval", maxval_at, "only maxval 255 is supported");
    if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_])) {
        r.fail("maxval", r.pos_, "expected a single whitespace byte before the raster");
    }
    ++r.pos_;

    const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t available = bytes.size() - r.pos_;
    if (available < expected) {
        std::ostringstream os;
        os << "expected " << expected << " raster bytes, found " << available;
        r.fail("raster", r.pos_, os.str());
    }
    std::vector<std::uint8_t> data(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_ + expected));
    return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

std::vector<std::uint8_t> save_gray(const GrayImage& image) {
    const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                               std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), image.pixels().begin(), image.pixels().end());
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("failed writing '" + path.string() + "'");
}

GrayImage read_gray_file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return load_gray(bytes);
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

void write_gray_file(const std::filesystem::path& path, const GrayImage& image) {
    write_file_bytes(path, save_gray(image));
}

GrayImage to_gray(const BinaryImage& image) {
    if (image.width() == 0 || image.height() == 0) {
        throw ContractError("to_gray: zero-sized image");
    }
    std::vector<std::uint8_t> data(image.pixels().size());
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = image.pixels()[i] ? 0 : 255;
    return GrayImage(image.width(), image.height(), std::move(data));
}

std::string to_plain_pbm(const BinaryImage& image) {
    std::ostringstream os;
    os << "P1\n" << image.width() << " " << image.height() << "\n";
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            if (x) os << ' ';
            os << static_cast<int>(image.at(x, y));
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace cseg
