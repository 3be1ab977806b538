#include "stprio/checksum.hpp"

#include "stprio/lexer.hpp"

#include <cstdio>

namespace stprio {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

} // namespace

Checksum checksum(const std::string& source_text) {
    return fnv1a(normalize_tokens(source_text), kFnvOffset);
}

Checksum checksum_raw(const std::string& bytes) {
    return fnv1a(bytes, kFnvOffset);
}

Checksum checksum_combine(Checksum acc, Checksum next) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        acc ^= (next >> shift) & 0xff;
        acc *= kFnvPrime;
    }
    return acc;
}

std::string checksum_to_hex(Checksum c) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(c));
    return std::string(buf);
}

} // namespace stprio
