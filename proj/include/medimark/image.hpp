#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "medimark/errors.hpp"

namespace medimark {

/// 8-bit grayscale raster, row-major. The unit of all image processing.
struct PixelGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> samples; // length = width * height

    PixelGrid() = default;
    PixelGrid(std::size_t w, std::size_t h, std::uint8_t fill = 0);
    PixelGrid(std::size_t w, std::size_t h, std::vector<std::uint8_t> data);

    std::size_t pixel_count() const { return width * height; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return samples[y * width + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return samples[y * width + x]; }

    bool operator==(const PixelGrid&) const = default;
};

/// Axis-aligned region of interest. Its pixels (including LSBs) are never
/// overwritten by the embedder.
struct RoiRect {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t w = 0;
    std::size_t h = 0;

    std::size_t area() const { return w * h; }
    bool contains(std::size_t px, std::size_t py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool fits(std::size_t imageWidth, std::size_t imageHeight) const {
        return w >= 1 && h >= 1 && x + w <= imageWidth && y + h <= imageHeight;
    }

    bool operator==(const RoiRect&) const = default;
};

/// Binary plane, row-major, one bit per pixel (stored one byte per bit,
/// values 0/1).
struct BitPlane {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits; // length = width * height, each 0 or 1

    BitPlane() = default;
    BitPlane(std::size_t w, std::size_t h, std::uint8_t fill = 0);

    std::size_t bit_count() const { return width * height; }

    bool operator==(const BitPlane&) const = default;
};

/// Decode a binary PGM ("P5", maxval 255).
///
/// Header whitespace and '#' comments are handled per the PGM rules. Throws
/// MalformedHeader on bad magic or fields, UnsupportedFormat for non-P5 PNM
/// or maxval != 255, TruncatedData when fewer than width*height samples
/// follow the header.
PixelGrid read_pgm(const std::vector<std::uint8_t>& bytes);

/// Canonical emission: "P5\n{width} {height}\n255\n" followed by raw samples.
/// read_pgm(write_pgm(g)) == g.
std::vector<std::uint8_t> write_pgm(const PixelGrid& grid);

/// Split a grid into its LSB-cleared high planes and the LSB plane.
/// merge_lsb(high, lsb) restores the input exactly.
struct SplitResult {
    PixelGrid high;
    BitPlane lsb;
};
SplitResult split_lsb(const PixelGrid& grid);

/// Inverse of split_lsb: sample[i] = high.samples[i] + lsb.bits[i].
/// Throws DimensionMismatch, or OddHighSample if a high sample has bit 0 set.
PixelGrid merge_lsb(const PixelGrid& high, const BitPlane& lsb);

/// All row-major indices whose pixel lies outside roi, ascending.
/// Count = width*height - roi.w*roi.h. Throws RoiOutOfBounds.
std::vector<std::size_t> raster_positions_outside(std::size_t width, std::size_t height,
                                                  const RoiRect& roi);

} // namespace medimark
