#include "medimark/image.hpp"

#include <string>

namespace medimark {

namespace {

// Dimension caps keep width*height arithmetic and the watermark header's
// u16 ROI fields safe. Medical rasters are far below these.
constexpr std::size_t kMaxDimension = 65535;
constexpr std::size_t kMaxPixels = std::size_t{1} << 28;

bool is_pnm_space(int c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

} // namespace

PixelGrid::PixelGrid(std::size_t w, std::size_t h, std::uint8_t fill)
    : width(w), height(h), samples(w * h, fill) {}

PixelGrid::PixelGrid(std::size_t w, std::size_t h, std::vector<std::uint8_t> data)
    : width(w), height(h), samples(std::move(data)) {
    if (samples.size() != w * h) {
        throw DimensionMismatch("pixel grid: sample count does not match dimensions");
    }
}

BitPlane::BitPlane(std::size_t w, std::size_t h, std::uint8_t fill)
    : width(w), height(h), bits(w * h, fill) {}

PixelGrid read_pgm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) {
        throw MalformedHeader("pgm: input shorter than a magic number");
    }
    if (bytes[0] != 'P') {
        throw MalformedHeader("pgm: bad magic number");
    }
    if (bytes[1] != '5') {
        if (bytes[1] >= '1' && bytes[1] <= '7') {
            throw UnsupportedFormat("pgm: only binary PGM (P5) is supported");
        }
        throw MalformedHeader("pgm: bad magic number");
    }

    std::size_t pos = 2;
    auto skip_separators = [&]() {
        while (pos < bytes.size()) {
            const int c = bytes[pos];
            if (is_pnm_space(c)) {
                ++pos;
            } else if (c == '#') {
                // comment runs to end of line
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else {
                break;
            }
        }
    };
    auto read_number = [&](const char* field) -> std::size_t {
        skip_separators();
        if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9') {
            throw MalformedHeader(std::string("pgm: expected numeric ") + field);
        }
        std::size_t value = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
            if (value > kMaxPixels) {
                throw MalformedHeader(std::string("pgm: ") + field + " out of range");
            }
            ++pos;
        }
        return value;
    };

    const std::size_t width = read_number("width");
    const std::size_t height = read_number("height");
    const std::size_t maxval = read_number("maxval");

    if (width == 0 || height == 0) {
        throw MalformedHeader("pgm: zero width or height");
    }
    if (width > kMaxDimension || height > kMaxDimension || width * height > kMaxPixels) {
        throw UnsupportedFormat("pgm: image dimensions exceed supported range");
    }
    if (maxval != 255) {
        throw UnsupportedFormat("pgm: only maxval 255 is supported");
    }

    // Exactly one whitespace byte separates the maxval from the raster.
    if (pos >= bytes.size() || !is_pnm_space(bytes[pos])) {
        throw MalformedHeader("pgm: missing separator before raster data");
    }
    ++pos;

    const std::size_t count = width * height;
    if (bytes.size() - pos < count) {
        throw TruncatedData("pgm: raster data shorter than width*height");
    }

    PixelGrid grid;
    grid.width = width;
    grid.height = height;
    grid.samples.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
    return grid;
}

std::vector<std::uint8_t> write_pgm(const PixelGrid& grid) {
    const std::string header = "P5\n" + std::to_string(grid.width) + " " +
                               std::to_string(grid.height) + "\n255\n";
    std::vector<std::uint8_t> out;
    out.reserve(header.size() + grid.samples.size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), grid.samples.begin(), grid.samples.end());
    return out;
}

SplitResult split_lsb(const PixelGrid& grid) {
    SplitResult result;
    result.high.width = grid.width;
    result.high.height = grid.height;
    result.high.samples.resize(grid.samples.size());
    result.lsb.width = grid.width;
    result.lsb.height = grid.height;
    result.lsb.bits.resize(grid.samples.size());
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
        result.high.samples[i] = static_cast<std::uint8_t>(grid.samples[i] & 0xFE);
        result.lsb.bits[i] = static_cast<std::uint8_t>(grid.samples[i] & 0x01);
    }
    return result;
}

PixelGrid merge_lsb(const PixelGrid& high, const BitPlane& lsb) {
    if (high.width != lsb.width || high.height != lsb.height) {
        throw DimensionMismatch("merge_lsb: grid and plane dimensions differ");
    }
    PixelGrid out;
    out.width = high.width;
    out.height = high.height;
    out.samples.resize(high.samples.size());
    for (std::size_t i = 0; i < high.samples.size(); ++i) {
        if (high.samples[i] & 0x01) {
            throw OddHighSample("merge_lsb: high sample has bit 0 set");
        }
        out.samples[i] = static_cast<std::uint8_t>(high.samples[i] | (lsb.bits[i] & 0x01));
    }
    return out;
}

std::vector<std::size_t> raster_positions_outside(std::size_t width, std::size_t height,
                                                  const RoiRect& roi) {
    if (!roi.fits(width, height)) {
        throw RoiOutOfBounds("roi does not fit inside the grid");
    }
    std::vector<std::size_t> positions;
    positions.reserve(width * height - roi.area());
    for (std::size_t y = 0; y < height; ++y) {
        if (y < roi.y || y >= roi.y + roi.h) {
            for (std::size_t x = 0; x < width; ++x) {
                positions.push_back(y * width + x);
            }
        } else {
            for (std::size_t x = 0; x < roi.x; ++x) {
                positions.push_back(y * width + x);
            }
            for (std::size_t x = roi.x + roi.w; x < width; ++x) {
                positions.push_back(y * width + x);
            }
        }
    }
    return positions;
}

} // namespace medimark
