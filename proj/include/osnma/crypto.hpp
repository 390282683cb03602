#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace osnma {

using Bytes = std::vector<uint8_t>;

enum class HashFunction : uint8_t {
   Sha256,
   Sha3_256,
};

enum class MacFunction : uint8_t {
   HmacSha256,
   CmacAes,
};

std::string_view to_string(HashFunction h);
std::string_view to_string(MacFunction m);
/// Accepts "SHA-256"/"sha256" and "SHA3-256"/"sha3-256". Throws UnsupportedHash.
HashFunction parse_hash_function(std::string_view name);
/// Accepts "HMAC-SHA256" and "CMAC-AES". Throws UnsupportedMacFunction.
MacFunction parse_mac_function(std::string_view name);

}  // namespace osnma

namespace osnma::crypto {

Bytes sha256(std::span<const uint8_t> data);
Bytes sha512(std::span<const uint8_t> data);
Bytes sha3_256(std::span<const uint8_t> data);
Bytes hash(HashFunction h, std::span<const uint8_t> data);

Bytes hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data);
Bytes hmac_sha512(std::span<const uint8_t> key, std::span<const uint8_t> data);
/// AES-CMAC; key must be 16, 24 or 32 bytes (throws UnsupportedMacFunction otherwise).
Bytes cmac_aes(std::span<const uint8_t> key, std::span<const uint8_t> data);
Bytes mac(MacFunction m, std::span<const uint8_t> key, std::span<const uint8_t> data);

/// SHA-256 in counter mode: H(label || seed || be32(i)) concatenated, cut to nbytes.
Bytes expand(std::string_view label, std::span<const uint8_t> seed, size_t nbytes);

/// First 8 bytes of SHA-256, hex encoded. Used as the payload digest in event logs.
std::string short_digest(std::span<const uint8_t> data);

bool constant_time_equal(std::span<const uint8_t> a, std::span<const uint8_t> b);

}  // namespace osnma::crypto
