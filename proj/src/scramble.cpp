#include "medimark/scramble.hpp"

namespace medimark {

namespace {

constexpr std::size_t kBlock = 6;
constexpr std::size_t kHalf = 3;

// Copies a 6x3 half-block between maps. `half` selects the left (0) or
// right (1) three columns of the addressed block.
void copy_half(const PaddedMap& src, BlockCoord srcBlock, std::size_t srcHalf,
               PaddedMap& dst, BlockCoord dstBlock, std::size_t dstHalf) {
    const std::size_t sx = srcBlock.x * kBlock + srcHalf * kHalf;
    const std::size_t sy = srcBlock.y * kBlock;
    const std::size_t dx = dstBlock.x * kBlock + dstHalf * kHalf;
    const std::size_t dy = dstBlock.y * kBlock;
    for (std::size_t row = 0; row < kBlock; ++row) {
        for (std::size_t col = 0; col < kHalf; ++col) {
            dst.at(dx + col, dy + row) = src.at(sx + col, sy + row);
        }
    }
}

} // namespace

PaddedMap pad_map(const EdgeMap& map) {
    PaddedMap out;
    out.origWidth = map.width;
    out.origHeight = map.height;
    out.width = ((map.width + kBlock - 1) / kBlock) * kBlock;
    out.height = ((map.height + kBlock - 1) / kBlock) * kBlock;
    out.bits.assign(out.width * out.height, 0);
    for (std::size_t y = 0; y < map.height; ++y) {
        for (std::size_t x = 0; x < map.width; ++x) {
            out.at(x, y) = map.bits[y * map.width + x];
        }
    }
    return out;
}

EdgeMap unpad_map(const PaddedMap& map, std::size_t scale) {
    EdgeMap out(map.origWidth, map.origHeight, scale);
    for (std::size_t y = 0; y < out.height; ++y) {
        for (std::size_t x = 0; x < out.width; ++x) {
            out.bits[y * out.width + x] = map.at(x, y);
        }
    }
    return out;
}

std::vector<BlockCoord> spiral_block_order(std::size_t bw, std::size_t bh) {
    std::vector<BlockCoord> order;
    order.reserve(bw * bh);
    std::size_t left = 0, right = bw; // [left, right)
    std::size_t top = 0, bottom = bh; // [top, bottom)
    while (left < right && top < bottom) {
        for (std::size_t x = left; x < right; ++x) {
            order.push_back({x, top});
        }
        for (std::size_t y = top + 1; y < bottom; ++y) {
            order.push_back({right - 1, y});
        }
        if (bottom - top > 1) {
            for (std::size_t x = right - 1; x-- > left;) {
                order.push_back({x, bottom - 1});
            }
        }
        if (right - left > 1) {
            for (std::size_t y = bottom - 1; y-- > top + 1;) {
                order.push_back({left, y});
            }
        }
        ++left;
        ++top;
        if (right > left) --right;
        if (bottom > top) --bottom;
    }
    return order;
}

PaddedMap scramble_map(const PaddedMap& map) {
    const std::vector<BlockCoord> order = spiral_block_order(map.width / kBlock,
                                                             map.height / kBlock);
    const std::size_t n = order.size();
    PaddedMap out = map;
    for (std::size_t i = 0; i < n; ++i) {
        const BlockCoord& next = order[(i + 1) % n];
        copy_half(map, order[i], 1, out, order[i], 0);
        copy_half(map, next, 0, out, order[i], 1);
    }
    return out;
}

PaddedMap unscramble_map(const PaddedMap& map) {
    const std::vector<BlockCoord> order = spiral_block_order(map.width / kBlock,
                                                             map.height / kBlock);
    const std::size_t n = order.size();
    PaddedMap out = map;
    for (std::size_t i = 0; i < n; ++i) {
        const BlockCoord& prev = order[(i + n - 1) % n];
        copy_half(map, prev, 1, out, order[i], 0);
        copy_half(map, order[i], 0, out, order[i], 1);
    }
    return out;
}

} // namespace medimark
