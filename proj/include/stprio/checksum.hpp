#pragma once

#include <cstdint>
#include <string>

namespace stprio {

// 64-bit content checksum of normalized source text. Comments and whitespace
// between tokens do not affect the result; any token change does.
using Checksum = std::uint64_t;

Checksum checksum(const std::string& source_text);

// FNV-1a over raw bytes; building block for combined project checksums.
Checksum checksum_raw(const std::string& bytes);
Checksum checksum_combine(Checksum acc, Checksum next);

std::string checksum_to_hex(Checksum c);

} // namespace stprio
