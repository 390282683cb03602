#include <osnma/crypto.hpp>

#include <osnma/bitgrid.hpp>
#include <osnma/error.hpp>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/params.h>

#include <algorithm>
#include <memory>
#include <string>

namespace osnma {

std::string_view to_string(HashFunction h) {
   switch(h) {
      case HashFunction::Sha256:
         return "SHA-256";
      case HashFunction::Sha3_256:
         return "SHA3-256";
   }
   return "?";
}

std::string_view to_string(MacFunction m) {
   switch(m) {
      case MacFunction::HmacSha256:
         return "HMAC-SHA256";
      case MacFunction::CmacAes:
         return "CMAC-AES";
   }
   return "?";
}

namespace {

std::string normalize(std::string_view s) {
   std::string out;
   for(char c : s) {
      if(c != '-' && c != '_' && c != ' ') {
         out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
   }
   return out;
}

}  // namespace

HashFunction parse_hash_function(std::string_view name) {
   const auto n = normalize(name);
   if(n == "sha256") {
      return HashFunction::Sha256;
   }
   if(n == "sha3256") {
      return HashFunction::Sha3_256;
   }
   throw Error(ErrorCode::UnsupportedHash, std::string(name));
}

MacFunction parse_mac_function(std::string_view name) {
   const auto n = normalize(name);
   if(n == "hmacsha256") {
      return MacFunction::HmacSha256;
   }
   if(n == "cmacaes") {
      return MacFunction::CmacAes;
   }
   throw Error(ErrorCode::UnsupportedMacFunction, std::string(name));
}

}  // namespace osnma

namespace osnma::crypto {

namespace {

struct MdCtxDeleter {
      void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};

struct MacDeleter {
      void operator()(EVP_MAC* p) const { EVP_MAC_free(p); }
};

struct MacCtxDeleter {
      void operator()(EVP_MAC_CTX* p) const { EVP_MAC_CTX_free(p); }
};

Bytes digest(const EVP_MD* md, std::span<const uint8_t> data) {
   Bytes out(static_cast<size_t>(EVP_MD_get_size(md)));
   unsigned int len = 0;
   if(EVP_Digest(data.data(), data.size(), out.data(), &len, md, nullptr) != 1) {
      throw Error(ErrorCode::CryptoFailure, "EVP_Digest failed");
   }
   out.resize(len);
   return out;
}

Bytes hmac(const EVP_MD* md, std::span<const uint8_t> key, std::span<const uint8_t> data) {
   Bytes out(EVP_MAX_MD_SIZE);
   unsigned int len = 0;
   if(HMAC(md, key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(), &len) == nullptr) {
      throw Error(ErrorCode::CryptoFailure, "HMAC failed");
   }
   out.resize(len);
   return out;
}

}  // namespace

Bytes sha256(std::span<const uint8_t> data) {
   return digest(EVP_sha256(), data);
}

Bytes sha512(std::span<const uint8_t> data) {
   return digest(EVP_sha512(), data);
}

Bytes sha3_256(std::span<const uint8_t> data) {
   return digest(EVP_sha3_256(), data);
}

Bytes hash(HashFunction h, std::span<const uint8_t> data) {
   switch(h) {
      case HashFunction::Sha256:
         return sha256(data);
      case HashFunction::Sha3_256:
         return sha3_256(data);
   }
   throw Error(ErrorCode::UnsupportedHash, "unknown hash function code");
}

Bytes hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data) {
   return hmac(EVP_sha256(), key, data);
}

Bytes hmac_sha512(std::span<const uint8_t> key, std::span<const uint8_t> data) {
   return hmac(EVP_sha512(), key, data);
}

Bytes cmac_aes(std::span<const uint8_t> key, std::span<const uint8_t> data) {
   const char* cipher = nullptr;
   switch(key.size()) {
      case 16:
         cipher = "AES-128-CBC";
         break;
      case 24:
         cipher = "AES-192-CBC";
         break;
      case 32:
         cipher = "AES-256-CBC";
         break;
      default:
         throw Error(ErrorCode::UnsupportedMacFunction,
                     "CMAC-AES needs a 128, 192 or 256 bit key, got " + std::to_string(key.size() * 8));
   }

   std::unique_ptr<EVP_MAC, MacDeleter> mac(EVP_MAC_fetch(nullptr, "CMAC", nullptr));
   if(!mac) {
      throw Error(ErrorCode::CryptoFailure, "CMAC unavailable");
   }
   std::unique_ptr<EVP_MAC_CTX, MacCtxDeleter> ctx(EVP_MAC_CTX_new(mac.get()));
   OSSL_PARAM params[] = {
      OSSL_PARAM_construct_utf8_string("cipher", const_cast<char*>(cipher), 0),
      OSSL_PARAM_construct_end(),
   };
   if(!ctx || EVP_MAC_init(ctx.get(), key.data(), key.size(), params) != 1 ||
      EVP_MAC_update(ctx.get(), data.data(), data.size()) != 1) {
      throw Error(ErrorCode::CryptoFailure, "CMAC computation failed");
   }
   Bytes out(16);
   size_t len = 0;
   if(EVP_MAC_final(ctx.get(), out.data(), &len, out.size()) != 1) {
      throw Error(ErrorCode::CryptoFailure, "CMAC finalization failed");
   }
   out.resize(len);
   return out;
}

Bytes mac(MacFunction m, std::span<const uint8_t> key, std::span<const uint8_t> data) {
   switch(m) {
      case MacFunction::HmacSha256:
         return hmac_sha256(key, data);
      case MacFunction::CmacAes:
         return cmac_aes(key, data);
   }
   throw Error(ErrorCode::UnsupportedMacFunction, "unknown MAC function code");
}

Bytes expand(std::string_view label, std::span<const uint8_t> seed, size_t nbytes) {
   Bytes out;
   out.reserve(nbytes + 32);
   Bytes block(label.begin(), label.end());
   block.insert(block.end(), seed.begin(), seed.end());
   const size_t ctr_pos = block.size();
   block.resize(ctr_pos + 4);
   for(uint32_t i = 0; out.size() < nbytes; ++i) {
      block[ctr_pos + 0] = static_cast<uint8_t>(i >> 24);
      block[ctr_pos + 1] = static_cast<uint8_t>(i >> 16);
      block[ctr_pos + 2] = static_cast<uint8_t>(i >> 8);
      block[ctr_pos + 3] = static_cast<uint8_t>(i);
      const Bytes h = sha256(block);
      out.insert(out.end(), h.begin(), h.end());
   }
   out.resize(nbytes);
   return out;
}

std::string short_digest(std::span<const uint8_t> data) {
   const Bytes h = sha256(data);
   return bitgrid::to_hex(std::span(h).first(8));
}

bool constant_time_equal(std::span<const uint8_t> a, std::span<const uint8_t> b) {
   if(a.size() != b.size()) {
      return false;
   }
   return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace osnma::crypto
