// medimark: fragile-watermarking CLI for 8-bit grayscale medical images.
//
// Exit codes: 0 success/Intact, 2 usage error, 3 Tampered,
// 4 PayloadUnreadable/NotWatermarked, 5 I/O or store error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "medimark/store.hpp"
#include "medimark/watermark.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitTampered = 3;
constexpr int kExitUnreadable = 4;
constexpr int kExitIo = 5;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw medimark::StoreIoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const fs::path& target, const std::vector<std::uint8_t>& bytes) {
    static std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream name;
    name << target.filename().string() << ".tmp." << std::hex << rng();
    const fs::path tmp = target.parent_path().empty()
                             ? fs::path(name.str())
                             : target.parent_path() / name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw medimark::StoreIoError("cannot create " + tmp.string());
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            throw medimark::StoreIoError("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

void write_text_atomic(const fs::path& target, const std::string& text) {
    write_file_atomic(target, {text.begin(), text.end()});
}

medimark::SecretKey load_key(const std::string& keyFile) {
    std::string hex;
    if (!keyFile.empty()) {
        std::ifstream in(keyFile);
        if (!in) {
            throw UsageError("cannot open key file " + keyFile);
        }
        in >> hex;
    } else if (const char* env = std::getenv("MEDIMARK_KEY")) {
        hex = env;
    } else {
        throw UsageError("no key: set MEDIMARK_KEY (64 hex chars) or pass --key-file");
    }
    try {
        return medimark::parse_key_hex(hex);
    } catch (const medimark::KeyFormatError& e) {
        throw UsageError(std::string("MEDIMARK_KEY/--key-file: ") + e.what());
    }
}

medimark::RoiRect parse_roi(const std::string& text) {
    medimark::RoiRect roi;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream in(text);
    long long x = -1, y = -1, w = -1, h = -1;
    in >> x >> c1 >> y >> c2 >> w >> c3 >> h;
    if (!in || c1 != ',' || c2 != ',' || c3 != ',' || x < 0 || y < 0 || w < 1 || h < 1 ||
        !in.eof()) {
        throw UsageError("--roi expects X,Y,W,H with W,H >= 1");
    }
    roi.x = static_cast<std::size_t>(x);
    roi.y = static_cast<std::size_t>(y);
    roi.w = static_cast<std::size_t>(w);
    roi.h = static_cast<std::size_t>(h);
    return roi;
}

medimark::PatientRecord load_record(const fs::path& path) {
    try {
        return medimark::parse_record(read_file(path));
    } catch (const medimark::MalformedRecord& e) {
        throw UsageError("--patient file " + path.string() + ": " + e.what());
    }
}

json signature_to_json(const medimark::MomentSignature& sig) {
    json phi = json::array();
    for (double p : sig.phi) {
        phi.push_back(p);
    }
    return json{{"phi", phi}, {"average", sig.average}};
}

json regions_to_json(const std::vector<medimark::Region>& regions) {
    json out = json::array();
    for (const auto& r : regions) {
        out.push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
    }
    return out;
}

json report_to_json(const medimark::TamperReport& report) {
    json out{
        {"status", medimark::to_string(report.status)},
        {"momentMatch", report.momentMatch},
        {"mapMismatchCells", report.mapMismatchCells},
        {"regions", regions_to_json(report.regions)},
    };
    if (report.extractedSignature) {
        out["extractedSignature"] = signature_to_json(*report.extractedSignature);
    }
    if (report.recomputedSignature) {
        out["recomputedSignature"] = signature_to_json(*report.recomputedSignature);
    }
    return out;
}

int status_exit_code(medimark::VerifyStatus status) {
    switch (status) {
    case medimark::VerifyStatus::Intact: return kExitOk;
    case medimark::VerifyStatus::Tampered: return kExitTampered;
    case medimark::VerifyStatus::PayloadUnreadable:
    case medimark::VerifyStatus::NotWatermarked: return kExitUnreadable;
    }
    return kExitIo;
}

struct CommonOpts {
    std::string keyFile;
};

int cmd_embed(const std::string& imagePath, const std::string& roiText,
              const std::string& patientPath, const std::string& outPath,
              const medimark::EmbedParams& params, const CommonOpts& common) {
    const medimark::SecretKey key = load_key(common.keyFile);
    const medimark::RoiRect roi = parse_roi(roiText);
    const medimark::PixelGrid image = medimark::read_pgm(read_file(imagePath));
    const medimark::PatientRecord record = load_record(patientPath);

    const medimark::PixelGrid out = medimark::embed(image, roi, record, key, params);
    write_file_atomic(outPath, medimark::write_pgm(out));

    const std::size_t cap = medimark::capacity(image.width, image.height, roi, params.scale);
    const medimark::ExtractResult check = medimark::extract(out, key);
    std::cout << json{{"out", outPath},
                      {"payload_bytes", check.payloadBytes},
                      {"payload_bits", check.payloadBytes * 8},
                      {"capacity_bits", cap},
                      {"scale", params.scale}}
                     .dump()
              << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& imagePath, const std::string& reportPath,
               const medimark::VerifyParams& params, const CommonOpts& common) {
    const medimark::SecretKey key = load_key(common.keyFile);
    const medimark::PixelGrid image = medimark::read_pgm(read_file(imagePath));
    const medimark::TamperReport report = medimark::verify(image, key, params);

    const std::string text = report_to_json(report).dump();
    std::cout << text << "\n";
    if (!reportPath.empty()) {
        write_text_atomic(reportPath, text + "\n");
    }
    return status_exit_code(report.status);
}

int cmd_locate(const std::string& imagePath, const std::string& maskPath,
               const medimark::VerifyParams& params, const CommonOpts& common) {
    const medimark::SecretKey key = load_key(common.keyFile);
    const medimark::PixelGrid image = medimark::read_pgm(read_file(imagePath));
    const medimark::LocateResult result = medimark::locate(image, key, params);

    medimark::PixelGrid mask(result.mask.width, result.mask.height, 0);
    for (std::size_t i = 0; i < result.mask.bits.size(); ++i) {
        mask.samples[i] = result.mask.bits[i] ? 255 : 0;
    }
    write_file_atomic(maskPath, medimark::write_pgm(mask));
    std::cout << json{{"mask_out", maskPath}, {"regions", regions_to_json(result.regions)}}.dump()
              << "\n";
    return kExitOk;
}

int cmd_extract(const std::string& imagePath, const CommonOpts& common) {
    const medimark::SecretKey key = load_key(common.keyFile);
    const medimark::PixelGrid image = medimark::read_pgm(read_file(imagePath));
    const medimark::ExtractResult result = medimark::extract(image, key);

    const std::vector<std::uint8_t> bytes = medimark::serialize_record(result.record);
    std::cout << std::string(bytes.begin(), bytes.end()) << "\n";
    return kExitOk;
}

int cmd_store_ingest(const std::string& storeDir, const std::string& imagePath,
                     const std::string& roiText, const std::string& patientPath, bool archive,
                     const medimark::EmbedParams& params, const CommonOpts& common) {
    const medimark::SecretKey key = load_key(common.keyFile);
    const medimark::RoiRect roi = parse_roi(roiText);
    const medimark::PixelGrid image = medimark::read_pgm(read_file(imagePath));
    const medimark::PatientRecord record = load_record(patientPath);

    medimark::Store store{fs::path(storeDir)};
    const std::string id = store.ingest(image, roi, record, key, params, archive);
    std::cout << json{{"id", id}}.dump() << "\n";
    return kExitOk;
}

int cmd_store_get(const std::string& storeDir, const std::string& id, const std::string& outPath,
                  bool original) {
    medimark::Store store{fs::path(storeDir)};
    const medimark::PixelGrid image = original ? store.fetch_original(id) : store.fetch(id);
    write_file_atomic(outPath, medimark::write_pgm(image));
    std::cout << json{{"id", id}, {"out", outPath}}.dump() << "\n";
    return kExitOk;
}

int cmd_store_list(const std::string& storeDir) {
    medimark::Store store{fs::path(storeDir)};
    json out = json::array();
    for (const medimark::StoreEntry& entry : store.list()) {
        out.push_back({{"id", entry.id},
                       {"patient", entry.patientId},
                       {"roi",
                        {{"x", entry.roi.x}, {"y", entry.roi.y}, {"w", entry.roi.w}, {"h", entry.roi.h}}},
                       {"created_at", entry.createdAt},
                       {"s", entry.scale}});
    }
    std::cout << out.dump() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fragile LSB watermarking for grayscale medical images"};
    app.require_subcommand(1);

    CommonOpts common;
    medimark::EmbedParams embedParams;
    medimark::VerifyParams verifyParams;

    std::string imagePath, roiText, patientPath, outPath, reportPath, maskPath;
    std::string storeDir, recordId;
    bool archive = false;

    auto add_key_opt = [&common](CLI::App* cmd) {
        cmd->add_option("--key-file", common.keyFile,
                        "file holding the 64-hex-char key (default: MEDIMARK_KEY env)");
    };
    auto add_feature_opts = [&embedParams](CLI::App* cmd) {
        cmd->add_option("--scale", embedParams.scale, "downscale factor for the edge map")
            ->check(CLI::IsMember({2, 4}));
        cmd->add_option("--sigma", embedParams.sigma, "LoG sigma")->check(CLI::PositiveNumber);
        cmd->add_option("--trel", embedParams.t_rel, "edge threshold relative to response range")
            ->check(CLI::Range(0.0, 1.0));
    };
    auto add_verify_opts = [&verifyParams](CLI::App* cmd) {
        cmd->add_option("--sigma", verifyParams.sigma, "LoG sigma used at embed time")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--trel", verifyParams.t_rel, "edge threshold used at embed time")
            ->check(CLI::Range(0.0, 1.0));
    };

    CLI::App* embedCmd = app.add_subcommand("embed", "watermark an image");
    embedCmd->add_option("--image", imagePath, "input PGM")->required();
    embedCmd->add_option("--roi", roiText, "region of interest X,Y,W,H")->required();
    embedCmd->add_option("--patient", patientPath, "patient record JSON file")->required();
    embedCmd->add_option("--out", outPath, "output PGM")->required();
    add_feature_opts(embedCmd);
    add_key_opt(embedCmd);

    CLI::App* verifyCmd = app.add_subcommand("verify", "check integrity and report tampering");
    verifyCmd->add_option("--image", imagePath, "watermarked PGM")->required();
    verifyCmd->add_option("--report", reportPath, "also write the report JSON here");
    add_verify_opts(verifyCmd);
    add_key_opt(verifyCmd);

    CLI::App* locateCmd = app.add_subcommand("locate", "write a tamper-localization mask");
    locateCmd->add_option("--image", imagePath, "watermarked PGM")->required();
    locateCmd->add_option("--mask-out", maskPath, "output mask PGM (0 clean / 255 tampered)")
        ->required();
    add_verify_opts(locateCmd);
    add_key_opt(locateCmd);

    CLI::App* extractCmd = app.add_subcommand("extract", "print the embedded patient record");
    extractCmd->add_option("--image", imagePath, "watermarked PGM")->required();
    add_key_opt(extractCmd);

    CLI::App* storeCmd = app.add_subcommand("store", "record store operations");
    storeCmd->require_subcommand(1);

    CLI::App* ingestCmd = storeCmd->add_subcommand("ingest", "watermark and store an image");
    ingestCmd->add_option("--store", storeDir, "store directory")->required();
    ingestCmd->add_option("--image", imagePath, "input PGM")->required();
    ingestCmd->add_option("--roi", roiText, "region of interest X,Y,W,H")->required();
    ingestCmd->add_option("--patient", patientPath, "patient record JSON file")->required();
    ingestCmd->add_flag("--archive", archive, "also archive the original image");
    add_feature_opts(ingestCmd);
    add_key_opt(ingestCmd);

    CLI::App* getCmd = storeCmd->add_subcommand("get", "fetch a watermarked image");
    getCmd->add_option("--store", storeDir, "store directory")->required();
    getCmd->add_option("--id", recordId, "record id")->required();
    getCmd->add_option("--out", outPath, "output PGM")->required();

    CLI::App* getOrigCmd = storeCmd->add_subcommand("get-original", "fetch an archived original");
    getOrigCmd->add_option("--store", storeDir, "store directory")->required();
    getOrigCmd->add_option("--id", recordId, "record id")->required();
    getOrigCmd->add_option("--out", outPath, "output PGM")->required();

    CLI::App* listCmd = storeCmd->add_subcommand("list", "list index entries");
    listCmd->add_option("--store", storeDir, "store directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            // --help and friends
            return app.exit(e);
        }
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (embedCmd->parsed()) {
            return cmd_embed(imagePath, roiText, patientPath, outPath, embedParams, common);
        }
        if (verifyCmd->parsed()) {
            return cmd_verify(imagePath, reportPath, verifyParams, common);
        }
        if (locateCmd->parsed()) {
            return cmd_locate(imagePath, maskPath, verifyParams, common);
        }
        if (extractCmd->parsed()) {
            return cmd_extract(imagePath, common);
        }
        if (storeCmd->parsed()) {
            if (ingestCmd->parsed()) {
                return cmd_store_ingest(storeDir, imagePath, roiText, patientPath, archive,
                                        embedParams, common);
            }
            if (getCmd->parsed()) {
                return cmd_store_get(storeDir, recordId, outPath, /*original=*/false);
            }
            if (getOrigCmd->parsed()) {
                return cmd_store_get(storeDir, recordId, outPath, /*original=*/true);
            }
            if (listCmd->parsed()) {
                return cmd_store_list(storeDir);
            }
        }
        std::cerr << "error: no command\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const medimark::NothingToLocate& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const medimark::NotWatermarked& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    } catch (const medimark::PayloadUnreadable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnreadable;
    } catch (const medimark::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
