#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace fracpar {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string to_hex(std::uint64_t v);

/// FNV-1a of the canonical dump (sorted keys, no whitespace) of a configuration.
std::string config_digest(const nlohmann::json& config);

}  // namespace fracpar
