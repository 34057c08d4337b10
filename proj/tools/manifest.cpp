#include "manifest.hpp"

#include <medzisc/io.hpp>
#include <medzisc/version.hpp>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

namespace medzisc::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string() + " for hashing");
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    char buffer[1 << 16];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx.get(), buffer, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &length);
    std::string hex;
    for (unsigned int k = 0; k < length; ++k) {
        hex += fmt::format("{:02x}", digest[k]);
    }
    return hex;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& path : inputs) {
        files.push_back({{"path", path.string()}, {"bytes", fs::file_size(path)}, {"sha256", sha256_file(path)}});
    }
    const auto now = std::chrono::system_clock::now();
    return {
        {"command", command},
        {"arguments", arguments},
        {"version", kVersion},
        {"config", config},
        {"seed", seed},
        {"threads", threads},
        {"inputs", files},
        {"outputs", outputs},
        {"timing_seconds", timing},
        {"hardware", {{"hardware_threads", std::thread::hardware_concurrency()}}},
        {"timestamp", fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)))},
    };
}

void RunManifest::write(const fs::path& dir) const {
    write_text_file(dir / "manifest.json", to_json().dump(2) + "\n");
}

}  // namespace medzisc::cli
