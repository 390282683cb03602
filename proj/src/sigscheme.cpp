#include <osnma/sigscheme.hpp>

#include <osnma/error.hpp>

#include <openssl/bn.h>
#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>
#include <openssl/param_build.h>

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

namespace osnma::sig {

std::string_view to_string(Family f) {
   switch(f) {
      case Family::EllipticCurve:
         return "EllipticCurve";
      case Family::Lattice:
         return "Lattice";
      case Family::HashStateless:
         return "HashStateless";
      case Family::HashStateful:
         return "HashStateful";
      case Family::Hybrid:
         return "Hybrid";
   }
   return "?";
}

namespace {

std::string canonical(std::string_view s) {
   std::string out;
   for(char c : s) {
      if(c == '-' || c == '+' || c == '_' || c == ' ') {
         continue;
      }
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
   }
   return out;
}

struct Row {
      SchemeCharacterization ch;
      std::vector<std::string> aliases;  // canonical forms
};

const std::vector<Row>& rows() {
   static const std::vector<Row> table = [] {
      std::vector<Row> t;
      t.push_back({{"ECDSA-P256", 264, 512, Family::EllipticCurve, false, "264", false, ""},
                   {"ecdsap256", "p256", "ecdsa256"}});
      t.push_back({{"ECDSA-P521", 536, 1056, Family::EllipticCurve, false, "536", false, ""},
                   {"ecdsap521", "p521", "ecdsa521"}});
      t.push_back({{"Dilithium2", 10496, 19360, Family::Lattice, true, "10496", false, ""},
                   {"dilithium2", "dilithium"}});
      t.push_back({{"Falcon-512", 7176, 5328, Family::Lattice, true, "7176", false, ""}, {"falcon512", "falcon"}});
      t.push_back({{"SPHINCS+-128s", 256, 62848, Family::HashStateless, true, "256", false, ""},
                   {"sphincs128s", "sphincs"}});
      t.push_back({{"XMSS-w32-h8",
                    256'000'000'000ULL,
                    2560,
                    Family::HashStateful,
                    true,
                    "256*10^9 / 2^35",
                    true,
                    "printed bit and byte public-key sizes disagree (2^35 bytes is about 2.75e11 bits)"},
                   {"xmssw32h8", "xmss"}});
      t.push_back({{"LMS-h512", 4096, 131072, Family::HashStateful, true, "2^12", false, ""}, {"lmsh512", "lms"}});
      return t;
   }();
   return table;
}

// ---------------------------------------------------------------- OpenSSL helpers

struct BnDeleter {
      void operator()(BIGNUM* p) const { BN_clear_free(p); }
};
struct BnCtxDeleter {
      void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
struct GroupDeleter {
      void operator()(EC_GROUP* p) const { EC_GROUP_free(p); }
};
struct PointDeleter {
      void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct PkeyDeleter {
      void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
      void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
      void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct ParamBldDeleter {
      void operator()(OSSL_PARAM_BLD* p) const { OSSL_PARAM_BLD_free(p); }
};
struct ParamDeleter {
      void operator()(OSSL_PARAM* p) const { OSSL_PARAM_free(p); }
};
struct EcdsaSigDeleter {
      void operator()(ECDSA_SIG* p) const { ECDSA_SIG_free(p); }
};

using Bn = std::unique_ptr<BIGNUM, BnDeleter>;
using BnCtx = std::unique_ptr<BN_CTX, BnCtxDeleter>;
using Group = std::unique_ptr<EC_GROUP, GroupDeleter>;
using Point = std::unique_ptr<EC_POINT, PointDeleter>;
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

void check(int ok, const char* what) {
   if(ok != 1) {
      throw Error(ErrorCode::CryptoFailure, what);
   }
}

Bn new_bn() {
   Bn b(BN_new());
   if(!b) {
      throw Error(ErrorCode::CryptoFailure, "BN_new");
   }
   return b;
}

Bn bn_from(std::span<const uint8_t> data) {
   Bn b(BN_bin2bn(data.data(), static_cast<int>(data.size()), nullptr));
   if(!b) {
      throw Error(ErrorCode::CryptoFailure, "BN_bin2bn");
   }
   return b;
}

Bytes bn_to(const BIGNUM* b, size_t len) {
   Bytes out(len);
   if(BN_bn2binpad(b, out.data(), static_cast<int>(len)) < 0) {
      throw Error(ErrorCode::CryptoFailure, "BN_bn2binpad");
   }
   return out;
}

}  // namespace

const std::vector<SchemeCharacterization>& builtin_characterizations() {
   static const std::vector<SchemeCharacterization> list = [] {
      std::vector<SchemeCharacterization> out;
      for(const auto& r : rows()) {
         out.push_back(r.ch);
      }
      return out;
   }();
   return list;
}

const SchemeCharacterization& characterize(std::string_view name) {
   const std::string c = canonical(name);
   for(const auto& r : rows()) {
      if(std::find(r.aliases.begin(), r.aliases.end(), c) != r.aliases.end()) {
         return r.ch;
      }
   }
   throw Error(ErrorCode::UnknownScheme, "unknown scheme '" + std::string(name) + "'");
}

void export_csv(std::ostream& out) {
   out << "name,pk_bits,sig_bits,family,quantum_resistant\n";
   for(const auto& c : builtin_characterizations()) {
      out << c.name << "," << c.pk_bits << "," << c.sig_bits << "," << to_string(c.family) << ","
          << (c.quantum_resistant ? "true" : "false") << "\n";
   }
}

// ---------------------------------------------------------------- ECDSA

namespace ecdsa {

namespace {

struct CurveInfo {
      int nid;
      const char* group_name;
      const EVP_MD* (*md)();
};

CurveInfo info(Curve c) {
   if(c == Curve::P256) {
      return {NID_X9_62_prime256v1, "prime256v1", EVP_sha256};
   }
   return {NID_secp521r1, "secp521r1", EVP_sha512};
}

Group group_for(Curve c) {
   Group g(EC_GROUP_new_by_curve_name(info(c).nid));
   if(!g) {
      throw Error(ErrorCode::CryptoFailure, "EC_GROUP_new_by_curve_name");
   }
   return g;
}

Bytes hmac(Curve c, std::span<const uint8_t> key, std::span<const uint8_t> data) {
   return c == Curve::P256 ? crypto::hmac_sha256(key, data) : crypto::hmac_sha512(key, data);
}

// Leftmost qlen bits of data as an integer.
Bn bits2int(std::span<const uint8_t> data, int qlen) {
   Bn x = bn_from(data);
   const int blen = static_cast<int>(data.size()) * 8;
   if(blen > qlen) {
      check(BN_rshift(x.get(), x.get(), blen - qlen), "BN_rshift");
   }
   return x;
}

size_t order_bytes(const EC_GROUP* g) {
   return static_cast<size_t>((BN_num_bits(EC_GROUP_get0_order(g)) + 7) / 8);
}

}  // namespace

Bytes rfc6979_nonce(Curve curve, std::span<const uint8_t> d, std::span<const uint8_t> h1) {
   const Group g = group_for(curve);
   const BIGNUM* q = EC_GROUP_get0_order(g.get());
   const int qlen = BN_num_bits(q);
   const size_t rlen = order_bytes(g.get());
   const size_t hlen = static_cast<size_t>(EVP_MD_get_size(info(curve).md()));
   BnCtx ctx(BN_CTX_new());

   const Bn x = bn_from(d);
   const Bytes x_oct = bn_to(x.get(), rlen);
   Bn z = bits2int(h1, qlen);
   if(BN_cmp(z.get(), q) >= 0) {
      check(BN_sub(z.get(), z.get(), q), "BN_sub");
   }
   const Bytes h_oct = bn_to(z.get(), rlen);

   Bytes V(hlen, 0x01);
   Bytes K(hlen, 0x00);
   auto step = [&](uint8_t sep, bool with_input) {
      Bytes m = V;
      m.push_back(sep);
      if(with_input) {
         m.insert(m.end(), x_oct.begin(), x_oct.end());
         m.insert(m.end(), h_oct.begin(), h_oct.end());
      }
      K = hmac(curve, K, m);
      V = hmac(curve, K, V);
   };
   step(0x00, true);
   step(0x01, true);

   for(;;) {
      Bytes T;
      while(T.size() * 8 < static_cast<size_t>(qlen)) {
         V = hmac(curve, K, V);
         T.insert(T.end(), V.begin(), V.end());
      }
      Bn k = bits2int(T, qlen);
      if(!BN_is_zero(k.get()) && BN_cmp(k.get(), q) < 0) {
         return bn_to(k.get(), rlen);
      }
      step(0x00, false);
   }
}

Bytes sign_digest(Curve curve, std::span<const uint8_t> d, std::span<const uint8_t> h1) {
   const Group g = group_for(curve);
   const BIGNUM* n = EC_GROUP_get0_order(g.get());
   const int qlen = BN_num_bits(n);
   const size_t rlen = order_bytes(g.get());
   BnCtx ctx(BN_CTX_new());

   const Bn dk = bn_from(d);
   const Bn k = bn_from(rfc6979_nonce(curve, d, h1));
   Point R(EC_POINT_new(g.get()));
   check(EC_POINT_mul(g.get(), R.get(), k.get(), nullptr, nullptr, ctx.get()), "EC_POINT_mul");
   Bn rx = new_bn();
   check(EC_POINT_get_affine_coordinates(g.get(), R.get(), rx.get(), nullptr, ctx.get()), "affine");
   Bn r = new_bn();
   check(BN_nnmod(r.get(), rx.get(), n, ctx.get()), "BN_nnmod");

   Bn e = bits2int(h1, qlen);
   check(BN_nnmod(e.get(), e.get(), n, ctx.get()), "BN_nnmod");
   Bn rd = new_bn();
   check(BN_mod_mul(rd.get(), r.get(), dk.get(), n, ctx.get()), "BN_mod_mul");
   check(BN_mod_add(rd.get(), rd.get(), e.get(), n, ctx.get()), "BN_mod_add");
   Bn kinv(BN_mod_inverse(nullptr, k.get(), n, ctx.get()));
   if(!kinv) {
      throw Error(ErrorCode::CryptoFailure, "BN_mod_inverse");
   }
   Bn s = new_bn();
   check(BN_mod_mul(s.get(), kinv.get(), rd.get(), n, ctx.get()), "BN_mod_mul");
   if(BN_is_zero(r.get()) || BN_is_zero(s.get())) {
      throw Error(ErrorCode::CryptoFailure, "degenerate ECDSA signature");
   }
   Bytes out = bn_to(r.get(), rlen);
   const Bytes sb = bn_to(s.get(), rlen);
   out.insert(out.end(), sb.begin(), sb.end());
   return out;
}

Bytes public_from_private(Curve curve, std::span<const uint8_t> d) {
   const Group g = group_for(curve);
   BnCtx ctx(BN_CTX_new());
   const Bn dk = bn_from(d);
   Point Q(EC_POINT_new(g.get()));
   check(EC_POINT_mul(g.get(), Q.get(), dk.get(), nullptr, nullptr, ctx.get()), "EC_POINT_mul");
   const size_t len = 1 + order_bytes(g.get());
   Bytes out(len);
   if(EC_POINT_point2oct(g.get(), Q.get(), POINT_CONVERSION_COMPRESSED, out.data(), len, ctx.get()) != len) {
      throw Error(ErrorCode::CryptoFailure, "EC_POINT_point2oct");
   }
   return out;
}

namespace {

bool verify_raw(Curve curve, std::span<const uint8_t> pk, std::span<const uint8_t> msg, std::span<const uint8_t> sig) {
   const Group g = group_for(curve);
   const size_t rlen = order_bytes(g.get());
   if(pk.size() != rlen + 1 || sig.size() != 2 * rlen || (pk[0] != 0x02 && pk[0] != 0x03)) {
      return false;
   }

   std::unique_ptr<OSSL_PARAM_BLD, ParamBldDeleter> bld(OSSL_PARAM_BLD_new());
   OSSL_PARAM_BLD_push_utf8_string(bld.get(), OSSL_PKEY_PARAM_GROUP_NAME, info(curve).group_name, 0);
   OSSL_PARAM_BLD_push_octet_string(bld.get(), OSSL_PKEY_PARAM_PUB_KEY, pk.data(), pk.size());
   std::unique_ptr<OSSL_PARAM, ParamDeleter> params(OSSL_PARAM_BLD_to_param(bld.get()));
   std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter> pctx(EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr));
   EVP_PKEY* raw = nullptr;
   if(!pctx || EVP_PKEY_fromdata_init(pctx.get()) != 1 ||
      EVP_PKEY_fromdata(pctx.get(), &raw, EVP_PKEY_PUBLIC_KEY, params.get()) != 1) {
      return false;
   }
   Pkey pkey(raw);

   std::unique_ptr<ECDSA_SIG, EcdsaSigDeleter> es(ECDSA_SIG_new());
   BIGNUM* r = BN_bin2bn(sig.data(), static_cast<int>(rlen), nullptr);
   BIGNUM* s = BN_bin2bn(sig.data() + rlen, static_cast<int>(rlen), nullptr);
   if(ECDSA_SIG_set0(es.get(), r, s) != 1) {
      BN_free(r);
      BN_free(s);
      return false;
   }
   unsigned char* der = nullptr;
   const int der_len = i2d_ECDSA_SIG(es.get(), &der);
   if(der_len <= 0) {
      return false;
   }
   std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> md(EVP_MD_CTX_new());
   const bool ok = EVP_DigestVerifyInit(md.get(), nullptr, info(curve).md(), nullptr, pkey.get()) == 1 &&
                   EVP_DigestVerify(md.get(), der, static_cast<size_t>(der_len), msg.data(), msg.size()) == 1;
   OPENSSL_free(der);
   return ok;
}

}  // namespace

}  // namespace ecdsa

namespace {

class EcdsaProvider final : public SignatureScheme {
   public:
      EcdsaProvider(ecdsa::Curve curve, const SchemeCharacterization& ch) : m_curve(curve), m_ch(ch) {}

      const SchemeCharacterization& characterization() const override { return m_ch; }
      bool surrogate() const override { return false; }

      KeyPair keygen(std::span<const uint8_t> seed) const override {
         const Group g = ecdsa::group_for(m_curve);
         const BIGNUM* n = EC_GROUP_get0_order(g.get());
         const size_t rlen = ecdsa::order_bytes(g.get());
         BnCtx ctx(BN_CTX_new());
         const Bytes wide = crypto::expand("osnma-ecdsa-keygen", seed, rlen + 16);
         Bn x = bn_from(wide);
         Bn n1(BN_dup(n));
         check(BN_sub_word(n1.get(), 1), "BN_sub_word");
         check(BN_nnmod(x.get(), x.get(), n1.get(), ctx.get()), "BN_nnmod");
         check(BN_add_word(x.get(), 1), "BN_add_word");
         KeyPair kp;
         kp.private_key = bn_to(x.get(), rlen);
         kp.public_key = ecdsa::public_from_private(m_curve, kp.private_key);
         return kp;
      }

      Bytes sign(std::span<const uint8_t> private_key, std::span<const uint8_t> msg) const override {
         const Bytes h = m_curve == ecdsa::Curve::P256 ? crypto::sha256(msg) : crypto::sha512(msg);
         return ecdsa::sign_digest(m_curve, private_key, h);
      }

      bool verify(std::span<const uint8_t> public_key,
                  std::span<const uint8_t> msg,
                  std::span<const uint8_t> signature) const override {
         return ecdsa::verify_raw(m_curve, public_key, msg, signature);
      }

   private:
      ecdsa::Curve m_curve;
      SchemeCharacterization m_ch;
};

// Ed25519 core for public verifiability, padded out to the exact sizes of
// the named scheme with hash expansions that the verifier recomputes.
class SurrogateProvider final : public SignatureScheme {
   public:
      static constexpr size_t kEdKey = 32;
      static constexpr size_t kEdSig = 64;

      explicit SurrogateProvider(const SchemeCharacterization& ch) : m_ch(ch) {
         if(ch.pk_bits % 8 != 0 || ch.sig_bits % 8 != 0 || ch.pk_bits < kEdKey * 8 || ch.sig_bits < kEdSig * 8) {
            throw Error(ErrorCode::NotSignable, "surrogate cannot match the sizes of " + ch.name);
         }
      }

      const SchemeCharacterization& characterization() const override { return m_ch; }
      bool surrogate() const override { return true; }

      KeyPair keygen(std::span<const uint8_t> seed) const override {
         KeyPair kp;
         kp.private_key = crypto::expand("osnma-surrogate-keygen:" + m_ch.name, seed, kEdKey);
         Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, kp.private_key.data(), kEdKey));
         if(!key) {
            throw Error(ErrorCode::CryptoFailure, "Ed25519 key import");
         }
         Bytes edpk(kEdKey);
         size_t len = edpk.size();
         check(EVP_PKEY_get_raw_public_key(key.get(), edpk.data(), &len), "Ed25519 public key");
         kp.public_key = edpk;
         const Bytes tail = pk_tail(edpk);
         kp.public_key.insert(kp.public_key.end(), tail.begin(), tail.end());
         return kp;
      }

      Bytes sign(std::span<const uint8_t> private_key, std::span<const uint8_t> msg) const override {
         if(private_key.size() != kEdKey) {
            throw Error(ErrorCode::BadKey, "surrogate private key must be 32 bytes");
         }
         Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, private_key.data(), kEdKey));
         std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> md(EVP_MD_CTX_new());
         Bytes sig(kEdSig);
         size_t len = sig.size();
         if(!key || EVP_DigestSignInit(md.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
            EVP_DigestSign(md.get(), sig.data(), &len, msg.data(), msg.size()) != 1) {
            throw Error(ErrorCode::CryptoFailure, "Ed25519 signing");
         }
         const Bytes tail = sig_tail(sig, msg);
         sig.insert(sig.end(), tail.begin(), tail.end());
         return sig;
      }

      bool verify(std::span<const uint8_t> public_key,
                  std::span<const uint8_t> msg,
                  std::span<const uint8_t> signature) const override {
         if(public_key.size() * 8 != m_ch.pk_bits || signature.size() * 8 != m_ch.sig_bits) {
            return false;
         }
         const auto edpk = public_key.first(kEdKey);
         const auto edsig = signature.first(kEdSig);
         if(!crypto::constant_time_equal(public_key.subspan(kEdKey), pk_tail(edpk))) {
            return false;
         }
         if(!crypto::constant_time_equal(signature.subspan(kEdSig), sig_tail(edsig, msg))) {
            return false;
         }
         Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, edpk.data(), kEdKey));
         if(!key) {
            return false;
         }
         std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> md(EVP_MD_CTX_new());
         return EVP_DigestVerifyInit(md.get(), nullptr, nullptr, nullptr, key.get()) == 1 &&
                EVP_DigestVerify(md.get(), edsig.data(), edsig.size(), msg.data(), msg.size()) == 1;
      }

   private:
      Bytes pk_tail(std::span<const uint8_t> edpk) const {
         return crypto::expand("osnma-surrogate-pk:" + m_ch.name, crypto::sha256(edpk), m_ch.pk_bits / 8 - kEdKey);
      }

      Bytes sig_tail(std::span<const uint8_t> edsig, std::span<const uint8_t> msg) const {
         Bytes in(edsig.begin(), edsig.end());
         in.insert(in.end(), msg.begin(), msg.end());
         return crypto::expand("osnma-surrogate-sig:" + m_ch.name, crypto::sha256(in), m_ch.sig_bits / 8 - kEdSig);
      }

      SchemeCharacterization m_ch;
};

class HybridProvider final : public SignatureScheme {
   public:
      HybridProvider(ProviderPtr classical, ProviderPtr pqc) : m_a(std::move(classical)), m_b(std::move(pqc)) {
         m_ch.name = "hybrid(" + m_a->name() + "," + m_b->name() + ")";
         m_ch.pk_bits = m_a->pk_bits() + m_b->pk_bits();
         m_ch.sig_bits = m_a->sig_bits() + m_b->sig_bits();
         m_ch.family = Family::Hybrid;
         m_ch.quantum_resistant = m_a->characterization().quantum_resistant || m_b->characterization().quantum_resistant;
         m_ch.pk_printed = std::to_string(m_ch.pk_bits);
      }

      const SchemeCharacterization& characterization() const override { return m_ch; }
      bool surrogate() const override { return m_a->surrogate() || m_b->surrogate(); }

      KeyPair keygen(std::span<const uint8_t> seed) const override {
         Bytes sa(seed.begin(), seed.end());
         Bytes sb = sa;
         sa.push_back('a');
         sb.push_back('b');
         const KeyPair a = m_a->keygen(sa);
         const KeyPair b = m_b->keygen(sb);
         KeyPair kp;
         kp.private_key.push_back(static_cast<uint8_t>(a.private_key.size() >> 8));
         kp.private_key.push_back(static_cast<uint8_t>(a.private_key.size()));
         kp.private_key.insert(kp.private_key.end(), a.private_key.begin(), a.private_key.end());
         kp.private_key.insert(kp.private_key.end(), b.private_key.begin(), b.private_key.end());
         kp.public_key = a.public_key;
         kp.public_key.insert(kp.public_key.end(), b.public_key.begin(), b.public_key.end());
         return kp;
      }

      Bytes sign(std::span<const uint8_t> private_key, std::span<const uint8_t> msg) const override {
         if(private_key.size() < 2) {
            throw Error(ErrorCode::BadKey, "hybrid private key too short");
         }
         const size_t la = (size_t{private_key[0]} << 8) | private_key[1];
         if(private_key.size() < 2 + la) {
            throw Error(ErrorCode::BadKey, "hybrid private key truncated");
         }
         Bytes out = m_a->sign(private_key.subspan(2, la), msg);
         const Bytes b = m_b->sign(private_key.subspan(2 + la), msg);
         out.insert(out.end(), b.begin(), b.end());
         return out;
      }

      bool verify(std::span<const uint8_t> public_key,
                  std::span<const uint8_t> msg,
                  std::span<const uint8_t> signature) const override {
         const size_t pa = m_a->pk_bits() / 8;
         const size_t sa = m_a->sig_bits() / 8;
         if(public_key.size() * 8 != m_ch.pk_bits || signature.size() * 8 != m_ch.sig_bits) {
            return false;
         }
         return m_a->verify(public_key.first(pa), msg, signature.first(sa)) &&
                m_b->verify(public_key.subspan(pa), msg, signature.subspan(sa));
      }

   private:
      ProviderPtr m_a;
      ProviderPtr m_b;
      SchemeCharacterization m_ch;
};

}  // namespace

ProviderPtr make_hybrid(ProviderPtr classical, ProviderPtr pqc) {
   return std::make_shared<HybridProvider>(std::move(classical), std::move(pqc));
}

ProviderPtr make_provider(std::string_view name) {
   const std::string c = canonical(name);
   if(c.rfind("hybrid(", 0) == 0 && c.back() == ')') {
      const std::string inner = c.substr(7, c.size() - 8);
      const auto comma = inner.find(',');
      if(comma == std::string::npos) {
         throw Error(ErrorCode::UnknownScheme, "hybrid needs two schemes: '" + std::string(name) + "'");
      }
      return make_hybrid(make_provider(inner.substr(0, comma)), make_provider(inner.substr(comma + 1)));
   }
   const auto& ch = characterize(name);
   switch(ch.family) {
      case Family::EllipticCurve:
         return std::make_shared<EcdsaProvider>(ch.pk_bits == 264 ? ecdsa::Curve::P256 : ecdsa::Curve::P521, ch);
      case Family::Lattice:
      case Family::HashStateless:
         return std::make_shared<SurrogateProvider>(ch);
      case Family::HashStateful:
      case Family::Hybrid:
         break;
   }
   throw Error(ErrorCode::NotSignable, ch.name + " is characterized only; stateful schemes have no signing provider");
}

// ---------------------------------------------------------------- registry

NpktRegistry::NpktRegistry() {
   m_providers[kNpktEcdsaP256] = make_provider("ECDSA-P256");
   m_providers[kNpktEcdsaP521] = make_provider("ECDSA-P521");
}

void NpktRegistry::assign(uint8_t code, std::string_view scheme) {
   if(code > 15) {
      throw Error(ErrorCode::ConfigInvalid, "NPKT is a 4-bit field");
   }
   if(code == kNpktEcdsaP256 || code == kNpktEcdsaP521 || code == kNpktSentinel) {
      throw Error(ErrorCode::ConfigInvalid, "NPKT " + std::to_string(code) + " is already assigned");
   }
   m_providers[code] = make_provider(scheme);
}

ProviderPtr NpktRegistry::lookup(uint8_t code) const {
   if(code == kNpktSentinel) {
      throw Error(ErrorCode::UnassignedNpkt, "NPKT 4 is assigned but has no modelled scheme");
   }
   const auto it = m_providers.find(code);
   if(it == m_providers.end()) {
      throw Error(ErrorCode::UnassignedNpkt,
                  "NPKT " + std::to_string(code) + " is reserved and has no extension mapping");
   }
   return it->second;
}

std::optional<uint8_t> NpktRegistry::code_for(std::string_view scheme) const {
   std::string want;
   try {
      want = canonical(make_provider(scheme)->name());
   } catch(const Error&) {
      return std::nullopt;
   }
   for(const auto& [code, p] : m_providers) {
      if(canonical(p->name()) == want) {
         return code;
      }
   }
   return std::nullopt;
}

bool NpktRegistry::is_assigned(uint8_t code) const {
   return code == kNpktSentinel || m_providers.count(code) != 0;
}

NpktRegistry NpktRegistry::from_config(std::istream& in) {
   NpktRegistry reg;
   std::string line;
   int lineno = 0;
   while(std::getline(in, line)) {
      ++lineno;
      if(const auto hash = line.find('#'); hash != std::string::npos) {
         line.erase(hash);
      }
      std::istringstream ls(line);
      std::string tok;
      std::optional<unsigned long> code;
      std::string scheme;
      bool any = false;
      while(ls >> tok) {
         any = true;
         if(tok.rfind("npkt=", 0) == 0) {
            try {
               code = std::stoul(tok.substr(5));
            } catch(const std::logic_error&) {
               throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": bad npkt value");
            }
         } else if(tok.rfind("scheme=", 0) == 0) {
            scheme = tok.substr(7);
         } else {
            throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": unknown token '" + tok + "'");
         }
      }
      if(!any) {
         continue;
      }
      if(!code || scheme.empty()) {
         throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": need npkt= and scheme=");
      }
      if(*code > 15) {
         throw Error(ErrorCode::ConfigInvalid, "line " + std::to_string(lineno) + ": NPKT is a 4-bit field");
      }
      reg.assign(static_cast<uint8_t>(*code), scheme);
   }
   return reg;
}

}  // namespace osnma::sig
