// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "medimark/store.hpp"
#include "medimark/watermark.hpp"
#include "support/testgen.hpp"

using namespace medimark;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::uint8_t> hex_bytes(const std::string& hex) {
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        return static_cast<std::uint8_t>(c - 'a' + 10);
    };
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    }
    return out;
}

std::size_t rect_gap(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
    if (a1 <= b0) return b0 - a1;
    if (b1 <= a0) return a0 - b1;
    return 0;
}

bool region_within(const Region& r, std::size_t px, std::size_t py, std::size_t pw,
                   std::size_t ph, std::size_t slack) {
    return rect_gap(r.x, r.x + r.w, px, px + pw) <= slack &&
           rect_gap(r.y, r.y + r.h, py, py + ph) <= slack;
}

// --- criteria 1-3 share one watermarking corpus -----------------------------

struct CorpusStats {
    int roundTrips = 0;
    int preserved = 0;
    int momentsStable = 0;
    int trials = 0;
    double seconds = 0.0;
};

CorpusStats run_corpus() {
    auto rng = testgen::make_rng(0xA11CE);
    CorpusStats stats;
    stats.trials = 100;
    const auto start = std::chrono::steady_clock::now();

    for (int trial = 0; trial < stats.trials; ++trial) {
        const PixelGrid image = testgen::structured_image(rng, 256, 256);
        const RoiRect roi = testgen::random_interior_roi(rng, 256, 256);
        const PatientRecord record = testgen::random_record(rng);
        const SecretKey key = testgen::random_key(rng);
        const Nonce nonce = testgen::random_nonce(rng);

        const PixelGrid out = embed(image, roi, record, key, {}, nonce);

        // 1. byte-exact record recovery + Intact verification
        const ExtractResult extracted = extract(out, key);
        const bool recordOk =
            serialize_record(extracted.record) == serialize_record(record);
        const bool intact = verify(out, key).status == VerifyStatus::Intact;
        if (recordOk && intact) {
            ++stats.roundTrips;
        }

        // 2. bits 1-7 everywhere, all 8 bits inside the ROI
        bool preserved = true;
        for (std::size_t i = 0; i < out.samples.size() && preserved; ++i) {
            preserved = (out.samples[i] & 0xFE) == (image.samples[i] & 0xFE);
        }
        for (std::size_t y = roi.y; y < roi.y + roi.h && preserved; ++y) {
            for (std::size_t x = roi.x; x < roi.x + roi.w && preserved; ++x) {
                preserved = out.at(x, y) == image.at(x, y);
            }
        }
        if (preserved) {
            ++stats.preserved;
        }

        // 3. recomputed invariants within relative 1e-12 of embed-time values
        const MomentSignature recomputed = hu_moments(split_lsb(out).high);
        bool stable = testgen::rel_diff(recomputed.average, extracted.signature.average) <= 1e-12;
        for (std::size_t i = 0; i < 7 && stable; ++i) {
            stable = testgen::rel_diff(recomputed.phi[i], extracted.signature.phi[i]) <= 1e-12;
        }
        if (stable) {
            ++stats.momentsStable;
        }
    }
    stats.seconds = seconds_since(start);
    return stats;
}

Outcome criterion_round_trip(const CorpusStats& stats) {
    std::ostringstream detail;
    detail << stats.roundTrips << "/" << stats.trials << " round trips Intact in " << std::fixed
           << std::setprecision(1) << stats.seconds << " s";
    return {stats.roundTrips == stats.trials && stats.seconds < 60.0, detail.str()};
}

Outcome criterion_preservation(const CorpusStats& stats) {
    std::ostringstream detail;
    detail << stats.preserved << "/" << stats.trials << " images bit-preserved";
    return {stats.preserved == stats.trials, detail.str()};
}

Outcome criterion_moment_stability(const CorpusStats& stats) {
    std::ostringstream detail;
    detail << stats.momentsStable << "/" << stats.trials << " signatures within 1e-12";
    return {stats.momentsStable == stats.trials, detail.str()};
}

// --- criterion 4: geometric invariance --------------------------------------

Outcome criterion_geometry() {
    auto rng = testgen::make_rng(0xB0B);
    const int trials = 50;
    int ok = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t w = 160 + 32 * static_cast<std::size_t>(trial % 4);
        const std::size_t h = 256 - 16 * static_cast<std::size_t>(trial % 3);
        const PixelGrid image = testgen::structured_image(rng, w, h);
        const MomentSignature base = hu_moments(image);

        bool good = true;
        PixelGrid r = image;
        for (int quarter = 0; quarter < 3 && good; ++quarter) {
            r = testgen::rotate90(r);
            const MomentSignature sig = hu_moments(r);
            for (std::size_t i = 0; i < 7 && good; ++i) {
                good = testgen::rel_diff(base.phi[i], sig.phi[i]) <= 1e-9;
            }
        }
        // Mirror images: phi1..phi6 invariant; phi7 is the skew invariant and
        // flips sign under reflection, so its magnitude is compared.
        for (const PixelGrid& flipped :
             {testgen::flip_horizontal(image), testgen::flip_vertical(image)}) {
            if (!good) {
                break;
            }
            const MomentSignature sig = hu_moments(flipped);
            for (std::size_t i = 0; i < 6 && good; ++i) {
                good = testgen::rel_diff(base.phi[i], sig.phi[i]) <= 1e-9;
            }
            good = good &&
                   testgen::rel_diff(std::abs(base.phi[6]), std::abs(sig.phi[6])) <= 1e-9;
        }
        if (good) {
            ++ok;
        }
    }
    std::ostringstream detail;
    detail << ok << "/" << trials
           << " stable under rotations and flips (phi7 by magnitude under flips)";
    return {ok == trials, detail.str()};
}

// --- criterion 5: tamper detection and localization -------------------------

Outcome criterion_tamper_localization() {
    auto rng = testgen::make_rng(0xCAFE);
    const int trials = 50;
    EmbedParams params;
    params.scale = 2;
    params.sigma = 1.0;
    params.t_rel = 0.0;
    VerifyParams vp;
    vp.sigma = params.sigma;
    vp.t_rel = params.t_rel;

    int detected = 0;
    int localized = 0;
    int confined = 0;
    const auto start = std::chrono::steady_clock::now();

    for (int trial = 0; trial < trials; ++trial) {
        const PixelGrid image = testgen::structured_image(rng, 256, 256);
        const RoiRect roi = testgen::random_interior_roi(rng, 256, 256);
        const SecretKey key = testgen::random_key(rng);
        const PixelGrid out =
            embed(image, roi, testgen::random_record(rng), key, params, testgen::random_nonce(rng));

        // random 16x16 patch fully outside the ROI
        std::uniform_int_distribution<std::size_t> pxDist(0, 256 - 16);
        std::size_t px = 0, py = 0;
        do {
            px = pxDist(rng);
            py = pxDist(rng);
        } while (px + 16 > roi.x && px < roi.x + roi.w && py + 16 > roi.y &&
                 py < roi.y + roi.h);

        PixelGrid tampered = out;
        testgen::brighten_patch(tampered, px, py, 16, 16);

        const TamperReport report = verify(tampered, key, vp);
        if (report.status != VerifyStatus::Tampered) {
            continue;
        }
        ++detected;

        const LocateResult located = locate(tampered, key, vp);
        bool intersects = false;
        for (std::size_t y = py; y < py + 16 && !intersects; ++y) {
            for (std::size_t x = px; x < px + 16 && !intersects; ++x) {
                intersects = located.mask.bits[y * 256 + x] != 0;
            }
        }
        if (intersects) {
            ++localized;
        }
        bool allNear = !located.regions.empty();
        for (const Region& region : located.regions) {
            allNear = allNear && region_within(region, px, py, 16, 16, 4 * params.scale);
        }
        if (allNear) {
            ++confined;
        }
    }
    const double elapsed = seconds_since(start);

    std::ostringstream detail;
    detail << detected << "/" << trials << " detected, " << localized << "/" << detected
           << " masks hit the patch, " << confined << "/" << detected << " region sets within "
           << 4 * params.scale << " px, in " << std::fixed << std::setprecision(1) << elapsed
           << " s";
    const bool pass = detected >= 49 && localized == detected && confined == detected &&
                      elapsed < 120.0;
    return {pass, detail.str()};
}

// --- criterion 6: watermark damage honesty -----------------------------------

Outcome criterion_payload_damage() {
    auto rng = testgen::make_rng(0xD00D);
    const int trials = 50;
    int unreadable = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const PixelGrid image = testgen::structured_image(rng, 128, 128);
        const RoiRect roi{48, 32, 32, 32};
        const SecretKey key = testgen::random_key(rng);
        const PixelGrid out =
            embed(image, roi, testgen::random_record(rng), key, {}, testgen::random_nonce(rng));

        // pick a random LSB position that carries ciphertext
        const std::size_t payloadBits = extract(out, key).payloadBytes * 8;
        std::vector<std::size_t> positions = raster_positions_outside(128, 128, roi);
        positions.resize(payloadBits); // payload fills the leading positions
        std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);

        PixelGrid damaged = out;
        damaged.samples[positions[pick(rng)]] ^= 0x01;
        if (verify(damaged, key).status == VerifyStatus::PayloadUnreadable) {
            ++unreadable;
        }
    }
    std::ostringstream detail;
    detail << unreadable << "/" << trials << " single-LSB flips reported PayloadUnreadable";
    return {unreadable == trials, detail.str()};
}

// --- criterion 7: scramble bijectivity ---------------------------------------

Outcome criterion_scramble() {
    auto rng = testgen::make_rng(0xE66);
    const int trials = 1000;
    std::uniform_int_distribution<std::size_t> sides(1, 10); // x6 -> {6,...,60}
    std::uniform_int_distribution<int> bit(0, 1);
    int ok = 0;
    for (int trial = 0; trial < trials; ++trial) {
        PaddedMap map;
        map.width = 6 * sides(rng);
        map.height = 6 * sides(rng);
        map.origWidth = map.width;
        map.origHeight = map.height;
        map.bits.resize(map.width * map.height);
        for (auto& b : map.bits) {
            b = static_cast<std::uint8_t>(bit(rng));
        }

        const PaddedMap scrambled = scramble_map(map);
        const auto pop = [](const PaddedMap& m) {
            return std::count(m.bits.begin(), m.bits.end(), 1);
        };
        if (pop(scrambled) == pop(map) && unscramble_map(scrambled) == map) {
            ++ok;
        }
    }
    std::ostringstream detail;
    detail << ok << "/" << trials << " maps round-tripped with popcount preserved";
    return {ok == trials, detail.str()};
}

// --- criterion 8: crypto known-answer tests ----------------------------------

Outcome criterion_crypto() {
    SecretKey key;
    const std::vector<std::uint8_t> keyBytes =
        hex_bytes("603deb1015ca71be2b73aef0857d77811f352c073b6108d72d9810a30914dff4");
    std::copy(keyBytes.begin(), keyBytes.end(), key.bytes.begin());
    Nonce nonce{};
    const std::vector<std::uint8_t> counter = hex_bytes("f0f1f2f3f4f5f6f7f8f9fafbfcfdfeff");
    std::copy(counter.begin(), counter.end(), nonce.begin());

    const std::vector<std::uint8_t> plain = hex_bytes(
        "6bc1bee22e409f96e93d7e117393172a"
        "ae2d8a571e03ac9c9eb76fac45af8e51"
        "30c81c46a35ce411e5fbc1191a0a52ef"
        "f69f2445df4f9b17ad2b417be66c3710");
    const std::vector<std::uint8_t> cipher = hex_bytes(
        "601ec313775789a5b7a7f504bbf3d228"
        "f443e3ca4d62b59aca84e990cacaf5c5"
        "2b0930daa23de94ce87017ba2d84988d"
        "dfc9c58db67aada613c2dd08457941a6");

    const bool enc = encrypt(plain, key, nonce) == cipher;
    const bool dec = decrypt(cipher, key, nonce) == plain;
    return {enc && dec,
            std::string("CTR-AES256 encrypt ") + (enc ? "ok" : "MISMATCH") + ", decrypt " +
                (dec ? "ok" : "MISMATCH")};
}

// --- criterion 9: unwatermarked rejection ------------------------------------

Outcome criterion_rejection() {
    auto rng = testgen::make_rng(0xF1D0);
    const int trials = 1000;
    std::uniform_int_distribution<std::size_t> dim(4, 300);
    int rejected = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const PixelGrid noise =
            read_pgm(write_pgm(testgen::noise_image(rng, dim(rng), dim(rng))));
        if (verify(noise, testgen::random_key(rng)).status == VerifyStatus::NotWatermarked) {
            ++rejected;
        }
    }
    std::ostringstream detail;
    detail << rejected << "/" << trials << " random images rejected as NotWatermarked";
    return {rejected == trials, detail.str()};
}

// --- criterion 10: store durability ------------------------------------------

struct SimulatedCrash {};

Outcome criterion_store_durability() {
    auto rng = testgen::make_rng(0xFEED);
    const fs::path root =
        fs::temp_directory_path() / ("medimark_acceptance_store_" + std::to_string(rng()));
    std::error_code cleanup;
    fs::remove_all(root, cleanup); // leftovers from an earlier aborted run
    fs::create_directories(root);

    const int cycles = 100;
    int ok = 0;
    {
        Store store(root);
        const SecretKey key = testgen::random_key(rng);
        const RoiRect roi{8, 8, 16, 16};
        const IngestStage stages[] = {IngestStage::ArchiveTempWritten, IngestStage::ArchiveRenamed,
                                      IngestStage::ObjectTempWritten, IngestStage::ObjectRenamed};

        for (int cycle = 0; cycle < cycles; ++cycle) {
            const PixelGrid image = testgen::structured_image(rng, 96, 96);
            const PatientRecord record = testgen::random_record(rng);
            const IngestStage crashAt = stages[cycle % 4];

            bool crashed = false;
            try {
                store.ingest(image, roi, record, key, {}, true, [&](IngestStage stage) {
                    if (stage == crashAt) {
                        throw SimulatedCrash{};
                    }
                });
            } catch (const SimulatedCrash&) {
                crashed = true;
            }

            bool consistent = crashed;
            try {
                for (const StoreEntry& entry : store.list()) {
                    store.fetch(entry.id); // throws if the index dangles
                }
            } catch (const Error&) {
                consistent = false;
            }

            // finish the interrupted ingest and read everything back
            bool completed = false;
            try {
                const std::string id = store.ingest(image, roi, record, key, {}, true);
                completed = write_pgm(store.fetch_original(id)) == write_pgm(image) &&
                            verify(store.fetch(id), key).status == VerifyStatus::Intact;
            } catch (const Error&) {
                completed = false;
            }

            if (consistent && completed) {
                ++ok;
            }
        }
    }
    std::error_code ec;
    fs::remove_all(root, ec);

    std::ostringstream detail;
    detail << ok << "/" << cycles << " interrupted ingests left a consistent index";
    return {ok == cycles, detail.str()};
}

} // namespace

int main() {
    const CorpusStats corpus = run_corpus();

    struct Row {
        int number;
        const char* name;
        Outcome outcome;
    };
    const Row rows[] = {
        {1, "round-trip fidelity", criterion_round_trip(corpus)},
        {2, "roi and high-plane preservation", criterion_preservation(corpus)},
        {3, "moment invariance under embedding", criterion_moment_stability(corpus)},
        {4, "geometric invariance of the moment engine", criterion_geometry()},
        {5, "tamper detection and localization", criterion_tamper_localization()},
        {6, "watermark-damage honesty", criterion_payload_damage()},
        {7, "scramble bijectivity", criterion_scramble()},
        {8, "crypto known-answer vectors", criterion_crypto()},
        {9, "unwatermarked rejection", criterion_rejection()},
        {10, "store durability under interruption", criterion_store_durability()},
    };

    int failures = 0;
    for (const Row& row : rows) {
        if (!row.outcome.pass) {
            ++failures;
        }
        std::printf("[%s] %2d. %s: %s\n", row.outcome.pass ? "PASS" : "FAIL", row.number,
                    row.name, row.outcome.detail.c_str());
    }
    std::printf("%d/10 acceptance criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
