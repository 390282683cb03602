#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ref {

/// Plain FIPS 180-4 SHA-256, independent of OpenSSL.
std::array<uint8_t, 32> sha256(std::span<const uint8_t> data);

}  // namespace ref
