#include "airgam/manifest.hpp"

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "airgam/csv.hpp"

namespace airgam {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file for digest: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buffer[8192];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(hex);
}

std::string utc_timestamp_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

nlohmann::json RunManifest::to_json() const {
    return nlohmann::json{{"command", command},
                          {"parameters", parameters},
                          {"input_digests", input_digests},
                          {"tool_version", tool_version},
                          {"timestamp", timestamp},
                          {"seed", seed}};
}

void RunManifest::write_beside(const std::string& output_path) const {
    write_file_atomic(output_path + ".manifest.json", to_json().dump(2) + "\n");
}

}  // namespace airgam
