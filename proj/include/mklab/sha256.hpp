#pragma once

#include <string>

namespace mklab {

// Hex digest of SHA-256(data); used for content hashes in run manifests.
std::string sha256_hex(const std::string& data);

}  // namespace mklab
