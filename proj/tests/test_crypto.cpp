#include <doctest.h>

#include "support/ref_sha256.hpp"

#include <osnma/bitgrid.hpp>
#include <osnma/crypto.hpp>
#include <osnma/error.hpp>

#include <random>
#include <string>

using namespace osnma;

namespace {

Bytes str(std::string_view s) {
   return Bytes(s.begin(), s.end());
}

std::string hex(std::span<const uint8_t> b) {
   return bitgrid::to_hex(b);
}

}  // namespace

TEST_CASE("hash functions against published digests") {
   CHECK(hex(crypto::sha256(str("abc"))) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
   CHECK(hex(crypto::sha3_256(str("abc"))) == "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532");
   CHECK(hex(crypto::hmac_sha256(str("Jefe"), str("what do ya want for nothing?"))) ==
         "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
   CHECK(hex(crypto::cmac_aes(bitgrid::from_hex("2b7e151628aed2a6abf7158809cf4f3c"),
                              bitgrid::from_hex("6bc1bee22e409f96e93d7e117393172a"))) ==
         "070a16b46b4d4144f79bdd9dd04a287c");
}

TEST_CASE("reference SHA-256 agrees with the library") {
   CHECK(hex(ref::sha256(str("abc"))) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
   CHECK(hex(ref::sha256(Bytes{})) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
   std::mt19937 rng(5);
   for(size_t len = 0; len < 200; ++len) {
      Bytes m(len);
      for(auto& b : m) {
         b = static_cast<uint8_t>(rng());
      }
      const auto r = ref::sha256(m);
      CHECK(Bytes(r.begin(), r.end()) == crypto::sha256(m));
   }
}

TEST_CASE("expand and MAC selection") {
   CHECK(hex(crypto::expand("osnma-lab", Bytes{1, 2}, 40)) ==
         "48deed61206838ed22d774785cc72e4c4d8c2042e76a4036afedaa7ed5875fc99850ed8b0b24a57b");
   CHECK(parse_hash_function("SHA3-256") == HashFunction::Sha3_256);
   CHECK(parse_mac_function("CMAC-AES") == MacFunction::CmacAes);
   try {
      crypto::cmac_aes(Bytes(15), str("x"));
      FAIL("15-byte CMAC key accepted");
   } catch(const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedMacFunction);
   }
   try {
      parse_hash_function("MD5");
      FAIL("MD5 accepted");
   } catch(const Error& e) {
      CHECK(e.code() == ErrorCode::UnsupportedHash);
   }
   CHECK(crypto::constant_time_equal(str("ab"), str("ab")));
   CHECK_FALSE(crypto::constant_time_equal(str("ab"), str("ac")));
   CHECK_FALSE(crypto::constant_time_equal(str("ab"), str("abc")));
}
