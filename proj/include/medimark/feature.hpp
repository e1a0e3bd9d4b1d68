#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "medimark/image.hpp"

namespace medimark {

/// Real-valued raster (binary64), row-major.
struct RealGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values; // length = width * height

    RealGrid() = default;
    RealGrid(std::size_t w, std::size_t h, double fill = 0.0)
        : width(w), height(h), values(w * h, fill) {}

    double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
    double& at(std::size_t x, std::size_t y) { return values[y * width + x]; }
};

/// Binary contour map at reduced scale; the localization signature.
struct EdgeMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> bits; // length = width * height, each 0 or 1
    std::size_t scale = 1;          // downscale factor relative to the source image

    EdgeMap() = default;
    EdgeMap(std::size_t w, std::size_t h, std::size_t s)
        : width(w), height(h), bits(w * h, 0), scale(s) {}

    bool operator==(const EdgeMap&) const = default;
};

/// Hu invariants phi1..phi7 plus their arithmetic mean; the global-integrity
/// signature.
struct MomentSignature {
    std::array<double, 7> phi{};
    double average = 0.0;

    bool operator==(const MomentSignature&) const = default;
};

/// Block-mean reduction by factor s per dimension. Output dims are
/// ceil(W/s) x ceil(H/s); partial edge blocks average over the pixels they
/// actually cover.
RealGrid downscale(const PixelGrid& grid, std::size_t s);

/// Laplacian-of-Gaussian kernel of size 2*ceil(3*sigma)+1, sampled from
///   -1/(pi*sigma^4) * (1 - r^2/(2*sigma^2)) * exp(-r^2/(2*sigma^2))
/// then shifted so the entries sum to exactly zero. Throws NonPositiveSigma.
RealGrid log_kernel(double sigma);

/// 2-D convolution with log_kernel(sigma); borders replicate the nearest
/// edge value; output dims equal input dims.
RealGrid log_response(const RealGrid& grid, double sigma);

/// Zero-crossing edge map. With theta = t_rel * (max - min) of the response,
/// a cell is an edge iff its right or down neighbor has a response of strictly
/// opposite sign and the absolute difference is at least theta.
EdgeMap edge_map(const RealGrid& response, double t_rel, std::size_t scale);

/// Hu's seven moment invariants and their mean, accumulated in binary64 in
/// row-major order. Throws ZeroMass when every sample is zero.
MomentSignature hu_moments(const PixelGrid& grid);

} // namespace medimark
