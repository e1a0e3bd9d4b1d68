#pragma once

#include <cstddef>
#include <vector>

#include "medimark/feature.hpp"

namespace medimark {

/// Edge map zero-padded on the right/bottom so both dimensions are multiples
/// of the 6x6 block size used by the scrambler.
struct PaddedMap {
    std::size_t width = 0;  // multiple of 6
    std::size_t height = 0; // multiple of 6
    std::vector<std::uint8_t> bits; // length = width * height, each 0 or 1
    std::size_t origWidth = 0;
    std::size_t origHeight = 0;

    std::uint8_t at(std::size_t x, std::size_t y) const { return bits[y * width + x]; }
    std::uint8_t& at(std::size_t x, std::size_t y) { return bits[y * width + x]; }

    bool operator==(const PaddedMap&) const = default;
};

/// Block coordinate in the 6x6 block grid, (x, y) order.
struct BlockCoord {
    std::size_t x = 0;
    std::size_t y = 0;
    bool operator==(const BlockCoord&) const = default;
};

/// Zero-pad an edge map to multiples of 6 per side.
PaddedMap pad_map(const EdgeMap& map);

/// Exact inverse of pad_map; re-attaches the downscale factor.
EdgeMap unpad_map(const PaddedMap& map, std::size_t scale);

/// Clockwise inward spiral over a bw x bh block grid, starting at (0,0):
/// top row left to right, right column downward, bottom row right to left,
/// left column upward, then the next ring in. Every block appears once.
std::vector<BlockCoord> spiral_block_order(std::size_t bw, std::size_t bh);

/// Rearrange the map's 6x6 blocks along the spiral path. Each block is viewed
/// as a (left, right) pair of 6x3 halves; output block i becomes
/// (right_i, left_{i+1 mod n}), a circular rotation of the half-block
/// sequence by one. Bijective; unscramble_map reverses it exactly.
PaddedMap scramble_map(const PaddedMap& map);

/// Exact inverse of scramble_map.
PaddedMap unscramble_map(const PaddedMap& map);

} // namespace medimark
