#include "medimark/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "medimark/crc32.hpp"

namespace medimark {

namespace {

constexpr double kMomentRelTol = 1e-12;

void put_u16_be(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::uint16_t get_u16_be(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t get_u32_be(const std::uint8_t* p) {
    return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
           (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

bool roi_overlaps_header(std::size_t width, std::size_t height, const RoiRect& roi) {
    const std::size_t first = width * height - kHeaderBits;
    for (std::size_t i = first; i < width * height; ++i) {
        if (roi.contains(i % width, i / width)) {
            return true;
        }
    }
    return false;
}

void validate_params(const EmbedParams& params) {
    if (params.scale != 2 && params.scale != 4) {
        throw Error("embed: scale must be 2 or 4");
    }
    if (!(params.sigma > 0.0)) {
        throw NonPositiveSigma("embed: sigma must be positive");
    }
    if (!(params.t_rel >= 0.0 && params.t_rel <= 1.0)) {
        throw Error("embed: t_rel must lie in [0, 1]");
    }
}

EdgeMap compute_edge_map(const PixelGrid& lsbZeroed, std::size_t scale, double sigma,
                         double t_rel) {
    const RealGrid reduced = downscale(lsbZeroed, scale);
    const RealGrid response = log_response(reduced, sigma);
    return edge_map(response, t_rel, scale);
}

Nonce random_nonce() {
    std::random_device rd;
    Nonce nonce;
    for (std::size_t i = 0; i < nonce.size(); i += 4) {
        const std::uint32_t word = rd();
        nonce[i] = static_cast<std::uint8_t>(word >> 24);
        nonce[i + 1] = static_cast<std::uint8_t>(word >> 16);
        nonce[i + 2] = static_cast<std::uint8_t>(word >> 8);
        nonce[i + 3] = static_cast<std::uint8_t>(word);
    }
    return nonce;
}

std::vector<std::size_t> payload_positions(std::size_t width, std::size_t height,
                                           const RoiRect& roi) {
    std::vector<std::size_t> positions = raster_positions_outside(width, height, roi);
    const std::size_t headerStart = width * height - kHeaderBits;
    positions.erase(std::lower_bound(positions.begin(), positions.end(), headerStart),
                    positions.end());
    return positions;
}

bool rel_match(double a, double b, double tol) {
    return a == b || std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

bool signatures_match(const MomentSignature& a, const MomentSignature& b) {
    for (std::size_t i = 0; i < 7; ++i) {
        if (!rel_match(a.phi[i], b.phi[i], kMomentRelTol)) {
            return false;
        }
    }
    return rel_match(a.average, b.average, kMomentRelTol);
}

// Everything verify and locate share: the report plus the raw mismatch grid
// at map resolution.
struct Analysis {
    TamperReport report;
    std::vector<std::uint8_t> mismatch; // origWidth x origHeight cells, 0/1
    std::size_t mapWidth = 0;
    std::size_t mapHeight = 0;
    std::size_t scale = 1;
};

std::vector<Region> regions_from_mismatch(const std::vector<std::uint8_t>& cells,
                                          std::size_t mapW, std::size_t mapH,
                                          std::size_t scale, std::size_t imageW,
                                          std::size_t imageH) {
    // Labeling runs on a one-cell dilation so that satellite fragments of a
    // single tamper site merge into one region; the reported rectangles cover
    // only the actual mismatch cells.
    std::vector<std::uint8_t> dilated(cells.size(), 0);
    for (std::size_t cy = 0; cy < mapH; ++cy) {
        for (std::size_t cx = 0; cx < mapW; ++cx) {
            if (!cells[cy * mapW + cx]) {
                continue;
            }
            const std::size_t x0 = cx > 0 ? cx - 1 : 0;
            const std::size_t y0 = cy > 0 ? cy - 1 : 0;
            const std::size_t x1 = std::min(cx + 1, mapW - 1);
            const std::size_t y1 = std::min(cy + 1, mapH - 1);
            for (std::size_t y = y0; y <= y1; ++y) {
                for (std::size_t x = x0; x <= x1; ++x) {
                    dilated[y * mapW + x] = 1;
                }
            }
        }
    }

    std::vector<Region> regions;
    std::vector<std::uint8_t> seen(cells.size(), 0);
    for (std::size_t start = 0; start < cells.size(); ++start) {
        if (!cells[start] || seen[start]) {
            continue;
        }
        // 8-connected flood fill over the dilated cells, box over real ones.
        std::size_t minX = mapW, minY = mapH, maxX = 0, maxY = 0;
        std::deque<std::size_t> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            const std::size_t idx = queue.front();
            queue.pop_front();
            const std::size_t cx = idx % mapW;
            const std::size_t cy = idx / mapW;
            if (cells[idx]) {
                minX = std::min(minX, cx);
                minY = std::min(minY, cy);
                maxX = std::max(maxX, cx);
                maxY = std::max(maxY, cy);
            }
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) {
                        continue;
                    }
                    const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(cx) + dx;
                    const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(cy) + dy;
                    if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(mapW) ||
                        ny >= static_cast<std::ptrdiff_t>(mapH)) {
                        continue;
                    }
                    const std::size_t nidx = static_cast<std::size_t>(ny) * mapW +
                                             static_cast<std::size_t>(nx);
                    if (dilated[nidx] && !seen[nidx]) {
                        seen[nidx] = 1;
                        queue.push_back(nidx);
                    }
                }
            }
        }
        Region region;
        region.x = minX * scale;
        region.y = minY * scale;
        region.w = std::min((maxX + 1) * scale, imageW) - region.x;
        region.h = std::min((maxY + 1) * scale, imageH) - region.y;
        regions.push_back(region);
    }
    return regions;
}

Analysis analyze(const PixelGrid& image, const SecretKey& key, const VerifyParams& params) {
    Analysis analysis;
    ExtractResult extracted;
    try {
        extracted = extract(image, key);
    } catch (const NotWatermarked&) {
        analysis.report.status = VerifyStatus::NotWatermarked;
        return analysis;
    } catch (const PayloadUnreadable&) {
        analysis.report.status = VerifyStatus::PayloadUnreadable;
        return analysis;
    }

    const PixelGrid lsbZeroed = split_lsb(image).high;
    analysis.report.extractedSignature = extracted.signature;
    try {
        analysis.report.recomputedSignature = hu_moments(lsbZeroed);
        analysis.report.momentMatch =
            signatures_match(extracted.signature, *analysis.report.recomputedSignature);
    } catch (const ZeroMass&) {
        // The embedder required nonzero mass, so a zero-mass image at verify
        // time is itself evidence of tampering.
        analysis.report.momentMatch = false;
    }

    const EdgeMap recomputed =
        compute_edge_map(lsbZeroed, extracted.scale, params.sigma, params.t_rel);
    const PaddedMap unscrambled = unscramble_map(extracted.map);

    analysis.mapWidth = recomputed.width;
    analysis.mapHeight = recomputed.height;
    analysis.scale = extracted.scale;
    analysis.mismatch.assign(recomputed.width * recomputed.height, 0);
    std::size_t mismatchCells = 0;
    for (std::size_t y = 0; y < recomputed.height; ++y) {
        for (std::size_t x = 0; x < recomputed.width; ++x) {
            const std::uint8_t a = recomputed.bits[y * recomputed.width + x];
            const std::uint8_t b = unscrambled.at(x, y);
            if (a != b) {
                analysis.mismatch[y * recomputed.width + x] = 1;
                ++mismatchCells;
            }
        }
    }
    analysis.report.mapMismatchCells = mismatchCells;

    if (analysis.report.momentMatch && mismatchCells == 0) {
        analysis.report.status = VerifyStatus::Intact;
    } else {
        analysis.report.status = VerifyStatus::Tampered;
        analysis.report.regions = regions_from_mismatch(
            analysis.mismatch, analysis.mapWidth, analysis.mapHeight, analysis.scale,
            image.width, image.height);
    }
    return analysis;
}

} // namespace

const char* to_string(VerifyStatus status) {
    switch (status) {
    case VerifyStatus::Intact: return "Intact";
    case VerifyStatus::Tampered: return "Tampered";
    case VerifyStatus::PayloadUnreadable: return "PayloadUnreadable";
    case VerifyStatus::NotWatermarked: return "NotWatermarked";
    }
    return "Unknown";
}

std::vector<std::uint8_t> encode_header(const HeaderBlock& header) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes);
    out.push_back(0x57);
    out.push_back(0x4D);
    out.push_back(1); // version
    put_u16_be(out, static_cast<std::uint16_t>(header.roi.x));
    put_u16_be(out, static_cast<std::uint16_t>(header.roi.y));
    put_u16_be(out, static_cast<std::uint16_t>(header.roi.w));
    put_u16_be(out, static_cast<std::uint16_t>(header.roi.h));
    out.push_back(static_cast<std::uint8_t>(header.scale));
    put_u32_be(out, header.payloadLenBytes);
    out.insert(out.end(), header.nonce.begin(), header.nonce.end());
    put_u32_be(out, crc32(out.data(), out.size()));
    out.resize(kHeaderBytes, 0);
    return out;
}

HeaderBlock decode_header(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() != kHeaderBytes) {
        throw NotWatermarked("header: wrong length");
    }
    if (bytes[0] != 0x57 || bytes[1] != 0x4D) {
        throw NotWatermarked("header: bad magic");
    }
    if (crc32(bytes.data(), 32) != get_u32_be(bytes.data() + 32)) {
        throw NotWatermarked("header: crc mismatch");
    }
    if (bytes[2] != 1) {
        throw NotWatermarked("header: unsupported version");
    }
    HeaderBlock header;
    header.roi.x = get_u16_be(bytes.data() + 3);
    header.roi.y = get_u16_be(bytes.data() + 5);
    header.roi.w = get_u16_be(bytes.data() + 7);
    header.roi.h = get_u16_be(bytes.data() + 9);
    header.scale = bytes[11];
    header.payloadLenBytes = get_u32_be(bytes.data() + 12);
    std::copy(bytes.begin() + 16, bytes.begin() + 32, header.nonce.begin());
    return header;
}

std::size_t capacity(std::size_t width, std::size_t height, const RoiRect& roi,
                     std::size_t scale) {
    (void)scale;
    if (!roi.fits(width, height)) {
        throw RoiOutOfBounds("capacity: roi does not fit inside the image");
    }
    if (width * height < kHeaderBits) {
        return 0;
    }
    if (roi_overlaps_header(width, height, roi)) {
        throw RoiOverlapsHeader("capacity: roi overlaps the header raster positions");
    }
    return width * height - roi.area() - kHeaderBits;
}

PixelGrid embed(const PixelGrid& image, const RoiRect& roi, const PatientRecord& record,
                const SecretKey& key, const EmbedParams& params,
                const std::optional<Nonce>& nonce) {
    validate_params(params);
    if (image.pixel_count() < kHeaderBits) {
        throw InsufficientCapacity("embed: image too small to carry the header");
    }
    const std::size_t cap = capacity(image.width, image.height, roi, params.scale);

    SplitResult split = split_lsb(image);
    const MomentSignature signature = hu_moments(split.high);
    const EdgeMap map = compute_edge_map(split.high, params.scale, params.sigma, params.t_rel);
    const PaddedMap scrambled = scramble_map(pad_map(map));

    const std::vector<std::uint8_t> plain = build_plaintext(record, signature, scrambled);
    const Nonce n = nonce.value_or(random_nonce());
    const std::vector<std::uint8_t> cipher = encrypt(plain, key, n);

    if (cipher.size() * 8 > cap) {
        throw InsufficientCapacity("embed: payload of " + std::to_string(cipher.size() * 8) +
                                   " bits exceeds capacity of " + std::to_string(cap) +
                                   " bits");
    }

    HeaderBlock header;
    header.roi = roi;
    header.scale = params.scale;
    header.payloadLenBytes = static_cast<std::uint32_t>(cipher.size());
    header.nonce = n;
    const std::vector<std::uint8_t> headerBits = unpack_bits(encode_header(header), kHeaderBits);

    // New LSB plane: ROI bits preserved, header at the tail, ciphertext over
    // the leading non-ROI positions, remaining capacity zeroed.
    BitPlane plane(image.width, image.height, 0);
    for (std::size_t y = roi.y; y < roi.y + roi.h; ++y) {
        for (std::size_t x = roi.x; x < roi.x + roi.w; ++x) {
            plane.bits[y * image.width + x] = split.lsb.bits[y * image.width + x];
        }
    }
    const std::size_t headerStart = image.pixel_count() - kHeaderBits;
    for (std::size_t i = 0; i < kHeaderBits; ++i) {
        plane.bits[headerStart + i] = headerBits[i];
    }
    const std::vector<std::uint8_t> cipherBits = unpack_bits(cipher, cipher.size() * 8);
    const std::vector<std::size_t> positions = payload_positions(image.width, image.height, roi);
    for (std::size_t i = 0; i < cipherBits.size(); ++i) {
        plane.bits[positions[i]] = cipherBits[i];
    }

    return merge_lsb(split.high, plane);
}

ExtractResult extract(const PixelGrid& image, const SecretKey& key, bool unscrambled) {
    if (image.pixel_count() < kHeaderBits) {
        throw NotWatermarked("extract: image too small to carry a header");
    }

    const std::size_t headerStart = image.pixel_count() - kHeaderBits;
    std::vector<std::uint8_t> headerBits(kHeaderBits);
    for (std::size_t i = 0; i < kHeaderBits; ++i) {
        headerBits[i] = image.samples[headerStart + i] & 1;
    }
    const HeaderBlock header = decode_header(pack_bits(headerBits));

    if (!header.roi.fits(image.width, image.height)) {
        throw NotWatermarked("extract: header roi does not fit the image");
    }
    if (header.scale != 2 && header.scale != 4) {
        throw NotWatermarked("extract: header scale is not 2 or 4");
    }
    if (roi_overlaps_header(image.width, image.height, header.roi)) {
        throw NotWatermarked("extract: header roi overlaps the header region");
    }

    const std::vector<std::size_t> positions =
        payload_positions(image.width, image.height, header.roi);
    const std::size_t payloadBits = static_cast<std::size_t>(header.payloadLenBytes) * 8;
    if (payloadBits > positions.size()) {
        throw NotWatermarked("extract: header payload length exceeds capacity");
    }

    std::vector<std::uint8_t> cipherBits(payloadBits);
    for (std::size_t i = 0; i < payloadBits; ++i) {
        cipherBits[i] = image.samples[positions[i]] & 1;
    }
    const std::vector<std::uint8_t> plain = decrypt(pack_bits(cipherBits), key, header.nonce);

    const std::size_t edgeW = (image.width + header.scale - 1) / header.scale;
    const std::size_t edgeH = (image.height + header.scale - 1) / header.scale;
    const std::size_t mapW = ((edgeW + 5) / 6) * 6;
    const std::size_t mapH = ((edgeH + 5) / 6) * 6;

    PlaintextParts parts;
    try {
        parts = parse_plaintext(plain, mapW, mapH, edgeW, edgeH);
    } catch (const CrcMismatch& e) {
        throw PayloadUnreadable(std::string("extract: ") + e.what());
    } catch (const MalformedRecord& e) {
        throw PayloadUnreadable(std::string("extract: ") + e.what());
    }

    ExtractResult result;
    result.record = std::move(parts.record);
    result.signature = parts.signature;
    result.map = unscrambled ? unscramble_map(parts.map) : std::move(parts.map);
    result.roi = header.roi;
    result.scale = header.scale;
    result.nonce = header.nonce;
    result.payloadBytes = header.payloadLenBytes;
    return result;
}

TamperReport verify(const PixelGrid& image, const SecretKey& key, const VerifyParams& params) {
    return analyze(image, key, params).report;
}

LocateResult locate(const PixelGrid& image, const SecretKey& key, const VerifyParams& params) {
    const Analysis analysis = analyze(image, key, params);
    if (analysis.report.status != VerifyStatus::Tampered) {
        throw NothingToLocate(std::string("locate: verify status is ") +
                              to_string(analysis.report.status));
    }

    LocateResult result;
    result.mask = BitPlane(image.width, image.height, 0);
    for (std::size_t cy = 0; cy < analysis.mapHeight; ++cy) {
        for (std::size_t cx = 0; cx < analysis.mapWidth; ++cx) {
            if (!analysis.mismatch[cy * analysis.mapWidth + cx]) {
                continue;
            }
            const std::size_t x1 = std::min((cx + 1) * analysis.scale, image.width);
            const std::size_t y1 = std::min((cy + 1) * analysis.scale, image.height);
            for (std::size_t y = cy * analysis.scale; y < y1; ++y) {
                for (std::size_t x = cx * analysis.scale; x < x1; ++x) {
                    result.mask.bits[y * image.width + x] = 1;
                }
            }
        }
    }
    result.regions = analysis.report.regions;
    return result;
}

} // namespace medimark
