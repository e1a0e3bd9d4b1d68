#include "medimark/feature.hpp"

#include <algorithm>
#include <cmath>

namespace medimark {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

RealGrid downscale(const PixelGrid& grid, std::size_t s) {
    const std::size_t outW = (grid.width + s - 1) / s;
    const std::size_t outH = (grid.height + s - 1) / s;
    RealGrid out(outW, outH);
    for (std::size_t cy = 0; cy < outH; ++cy) {
        const std::size_t y0 = cy * s;
        const std::size_t y1 = std::min(y0 + s, grid.height);
        for (std::size_t cx = 0; cx < outW; ++cx) {
            const std::size_t x0 = cx * s;
            const std::size_t x1 = std::min(x0 + s, grid.width);
            double sum = 0.0;
            for (std::size_t y = y0; y < y1; ++y) {
                for (std::size_t x = x0; x < x1; ++x) {
                    sum += static_cast<double>(grid.at(x, y));
                }
            }
            out.at(cx, cy) = sum / static_cast<double>((y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

RealGrid log_kernel(double sigma) {
    if (!(sigma > 0.0)) {
        throw NonPositiveSigma("log_kernel: sigma must be positive");
    }
    const auto radius = static_cast<std::size_t>(std::ceil(3.0 * sigma));
    const std::size_t k = 2 * radius + 1;
    RealGrid kernel(k, k);

    const double sigma2 = sigma * sigma;
    const double norm = -1.0 / (kPi * sigma2 * sigma2);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double dy = static_cast<double>(j) - static_cast<double>(radius);
        for (std::size_t i = 0; i < k; ++i) {
            const double dx = static_cast<double>(i) - static_cast<double>(radius);
            const double r2 = (dx * dx + dy * dy) / (2.0 * sigma2);
            const double value = norm * (1.0 - r2) * std::exp(-r2);
            kernel.at(i, j) = value;
            sum += value;
        }
    }
    // Shift so the kernel has exactly zero response on constant input.
    const double mean = sum / static_cast<double>(k * k);
    for (double& v : kernel.values) {
        v -= mean;
    }
    return kernel;
}

RealGrid log_response(const RealGrid& grid, double sigma) {
    const RealGrid kernel = log_kernel(sigma);
    const std::ptrdiff_t radius = static_cast<std::ptrdiff_t>(kernel.width / 2);
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(grid.width);
    const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(grid.height);

    RealGrid out(grid.width, grid.height);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double sum = 0.0;
            for (std::ptrdiff_t dy = -radius; dy <= radius; ++dy) {
                const std::ptrdiff_t sy = std::clamp(y + dy, std::ptrdiff_t{0}, h - 1);
                for (std::ptrdiff_t dx = -radius; dx <= radius; ++dx) {
                    const std::ptrdiff_t sx = std::clamp(x + dx, std::ptrdiff_t{0}, w - 1);
                    sum += kernel.at(static_cast<std::size_t>(radius + dx),
                                     static_cast<std::size_t>(radius + dy)) *
                           grid.at(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
                }
            }
            out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = sum;
        }
    }
    return out;
}

EdgeMap edge_map(const RealGrid& response, double t_rel, std::size_t scale) {
    EdgeMap map(response.width, response.height, scale);
    if (response.values.empty()) {
        return map;
    }
    const auto [minIt, maxIt] = std::minmax_element(response.values.begin(), response.values.end());
    const double theta = t_rel * (*maxIt - *minIt);

    for (std::size_t y = 0; y < response.height; ++y) {
        for (std::size_t x = 0; x < response.width; ++x) {
            const double here = response.at(x, y);
            bool edge = false;
            if (x + 1 < response.width) {
                const double right = response.at(x + 1, y);
                edge = here * right < 0.0 && std::abs(here - right) >= theta;
            }
            if (!edge && y + 1 < response.height) {
                const double down = response.at(x, y + 1);
                edge = here * down < 0.0 && std::abs(here - down) >= theta;
            }
            map.bits[y * map.width + x] = edge ? 1 : 0;
        }
    }
    return map;
}

MomentSignature hu_moments(const PixelGrid& grid) {
    // Raw geometric moments. For 8-bit rasters up to ~512x512 every term and
    // every partial sum is an integer below 2^53, so these accumulate exactly
    // regardless of magnitude.
    double m00 = 0.0, m10 = 0.0, m01 = 0.0, m11 = 0.0, m20 = 0.0, m02 = 0.0;
    double m21 = 0.0, m12 = 0.0, m30 = 0.0, m03 = 0.0;
    for (std::size_t yi = 0; yi < grid.height; ++yi) {
        const double y = static_cast<double>(yi);
        for (std::size_t xi = 0; xi < grid.width; ++xi) {
            const double v = static_cast<double>(grid.at(xi, yi));
            if (v == 0.0) {
                continue;
            }
            const double x = static_cast<double>(xi);
            const double xv = x * v;
            const double yv = y * v;
            m00 += v;
            m10 += xv;
            m01 += yv;
            m11 += x * yv;
            m20 += x * xv;
            m02 += y * yv;
            m21 += x * x * yv;
            m12 += y * y * xv;
            m30 += x * x * xv;
            m03 += y * y * yv;
        }
    }
    if (m00 == 0.0) {
        throw ZeroMass("hu_moments: image has zero mass");
    }

    const double xbar = m10 / m00;
    const double ybar = m01 / m00;

    const double mu00 = m00;
    const double mu11 = m11 - xbar * m01;
    const double mu20 = m20 - xbar * m10;
    const double mu02 = m02 - ybar * m01;
    const double mu21 = m21 - 2.0 * xbar * m11 - ybar * m20 + 2.0 * xbar * xbar * m01;
    const double mu12 = m12 - 2.0 * ybar * m11 - xbar * m02 + 2.0 * ybar * ybar * m10;
    const double mu30 = m30 - 3.0 * xbar * m20 + 2.0 * xbar * xbar * m10;
    const double mu03 = m03 - 3.0 * ybar * m02 + 2.0 * ybar * ybar * m01;

    const double inv2 = 1.0 / (mu00 * mu00);                // order 2: mu00^(1+1)
    const double inv3 = inv2 / std::sqrt(mu00);             // order 3: mu00^(1+3/2)
    const double n20 = mu20 * inv2;
    const double n02 = mu02 * inv2;
    const double n11 = mu11 * inv2;
    const double n30 = mu30 * inv3;
    const double n03 = mu03 * inv3;
    const double n21 = mu21 * inv3;
    const double n12 = mu12 * inv3;

    const double a = n30 + n12; // x-direction third-order sum
    const double b = n21 + n03; // y-direction third-order sum
    const double c = n30 - 3.0 * n12;
    const double d = 3.0 * n21 - n03;

    MomentSignature sig;
    sig.phi[0] = n20 + n02;
    sig.phi[1] = (n20 - n02) * (n20 - n02) + 4.0 * n11 * n11;
    sig.phi[2] = c * c + d * d;
    sig.phi[3] = a * a + b * b;
    sig.phi[4] = c * a * (a * a - 3.0 * b * b) + d * b * (3.0 * a * a - b * b);
    sig.phi[5] = (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b;
    sig.phi[6] = d * a * (a * a - 3.0 * b * b) - c * b * (3.0 * a * a - b * b);

    double total = 0.0;
    for (double p : sig.phi) {
        total += p;
    }
    sig.average = total / 7.0;
    return sig;
}

} // namespace medimark
