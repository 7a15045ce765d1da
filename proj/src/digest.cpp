#include "fracpar/digest.hpp"

#include <cstdio>

namespace fracpar {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_digest(const nlohmann::json& config) {
    // nlohmann::json keeps object keys sorted, so dump() is canonical.
    return to_hex(fnv1a64(config.dump()));
}

}  // namespace fracpar
