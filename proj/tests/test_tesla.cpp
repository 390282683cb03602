#include <doctest.h>

#include "support/ref_sha256.hpp"

#include <osnma/crypto.hpp>
#include <osnma/error.hpp>
#include <osnma/tesla.hpp>

#include <random>
#include <sstream>

using namespace osnma;
using namespace osnma::tesla;
using bitgrid::BitString;
using bitgrid::GstTime;

namespace {

TeslaParams params(unsigned lk, uint32_t n, HashFunction h = HashFunction::Sha256) {
   TeslaParams p;
   p.key_bits = lk;
   p.tag_bits = 40;
   p.hash = h;
   p.chain_length = n;
   p.start_time = GstTime{1200, 0};
   return p;
}

BitString counting_seed(unsigned lk) {
   Bytes s(lk / 8);
   for(size_t i = 0; i < s.size(); ++i) {
      s[i] = static_cast<uint8_t>(i);
   }
   return BitString::from_bytes(s);
}

ErrorCode code_of(auto&& fn) {
   try {
      fn();
   } catch(const Error& e) {
      return e.code();
   }
   FAIL("expected an osnma::Error");
   return ErrorCode::Overflow;
}

}  // namespace

TEST_CASE("chain generation") {
   const auto one = TeslaChain::generate(params(128, 1), counting_seed(128));
   CHECK(one.root_key() == derive(one.params(), counting_seed(128), 1));
   CHECK(one.length() == 1);

   // Frozen from an iterated hashlib computation.
   const auto c = TeslaChain::generate(params(128, 100), counting_seed(128));
   CHECK(c.root_key().to_hex() == "482f00084ecd9ca3feb7cb0d2d16fb63");
   CHECK(c.key(1).to_hex() == "6f5f2f18974cf70b83a972f37c36d5c3");
   CHECK(c.key(50).to_hex() == "0189d890ce03e720d6093e896fd7a5f4");
   CHECK(c.check());

   auto p3 = params(256, 5, HashFunction::Sha3_256);
   p3.chain_id = 3;
   p3.start_time = GstTime{1200, 7200};
   CHECK(TeslaChain::generate(p3, counting_seed(256)).root_key().to_hex() ==
         "4ede18901ad379cfc3c8bc3a45ff299f80519a3c417d6b761e04e5c01651c292");

   std::mt19937_64 rng(1);
   for(int i = 0; i < 20; ++i) {
      Bytes a(16), b(16);
      for(auto& x : a) {
         x = static_cast<uint8_t>(rng());
      }
      for(auto& x : b) {
         x = static_cast<uint8_t>(rng());
      }
      CHECK(TeslaChain::generate(params(128, 8), BitString::from_bytes(a)).root_key() !=
            TeslaChain::generate(params(128, 8), BitString::from_bytes(b)).root_key());
   }
   CHECK(code_of([] { TeslaChain::generate(params(128, 4), counting_seed(96)); }) == ErrorCode::BadSeedLength);
   CHECK(code_of([] { TeslaChain::generate(params(64, 4), counting_seed(64)); }) == ErrorCode::InvalidParams);
   CHECK(code_of([] { TeslaChain::generate(params(100, 4), counting_seed(96)); }) == ErrorCode::InvalidParams);
   CHECK(code_of([] { (void)TeslaChain::generate(params(128, 4), counting_seed(128)).key(5); }) ==
         ErrorCode::ChainExhausted);
}

TEST_CASE("derivation matches an independent SHA-256") {
   const auto c = TeslaChain::generate(params(128, 30), counting_seed(128));
   for(uint32_t i = 30; i >= 1; --i) {
      Bytes in = c.key(i).bytes();
      in.push_back(0);
      const uint32_t g = c.params().key_time(i).packed();
      for(int s = 24; s >= 0; s -= 8) {
         in.push_back(static_cast<uint8_t>(g >> s));
      }
      const auto h = ref::sha256(in);
      CHECK(BitString::from_bytes(Bytes(h.begin(), h.end()), 128) == c.key(i - 1));
   }
}

TEST_CASE("key verification") {
   const auto c = TeslaChain::generate(params(128, 60), counting_seed(128));
   const auto& p = c.params();
   CHECK(verify_key(p, c.key(1), 1, {0, c.root_key()}));
   CHECK(verify_key(p, c.key(50), 50, {30, c.key(30)}));
   CHECK_FALSE(verify_key(p, c.key(50), 50, {31, c.key(30)}));
   for(size_t b = 0; b < 128; ++b) {
      BitString k = c.key(1);
      k.set(b, !k.get(b));
      CHECK_FALSE(verify_key(p, k, 1, {0, c.root_key()}));
   }
   CHECK(code_of([&] { verify_key(p, c.key(3), 3, {3, c.key(3)}); }) == ErrorCode::IndexOrder);
}

TEST_CASE("tags") {
   const auto c = TeslaChain::generate(params(128, 100), counting_seed(128));
   const TagInfo info{1, 0, 0};
   const Bytes data = {'a', 'b', 'c'};
   const auto t = make_tag(c.params(), c.key_at(1), data, info);
   CHECK(t.bits == 0x5329b8b082ULL);  // hmac.new(K_1, 0100 || "abc") first 40 bits
   CHECK(make_tag(c.params(), c.key_at(1), data, info).bits == t.bits);
   CHECK(code_of([&] { make_tag(c.params(), c.key_at(0), data, info); }) == ErrorCode::RootKeySigning);
   CHECK(TagInfo::unpack(TagInfo{7, 4, 9}.packed()).cop == 9);

   auto p = c.params();
   p.tag_bits = 20;
   std::mt19937_64 rng(2);
   int differ = 0;
   for(int i = 0; i < 10000; ++i) {
      Bytes k1(16), k2(16);
      for(auto& x : k1) {
         x = static_cast<uint8_t>(rng());
      }
      for(auto& x : k2) {
         x = static_cast<uint8_t>(rng());
      }
      differ += make_tag(p, {1, BitString::from_bytes(k1)}, data, info).bits !=
                make_tag(p, {1, BitString::from_bytes(k2)}, data, info).bits;
   }
   CHECK(differ >= 9990);
}

TEST_CASE("tags per MACK") {
   CHECK(tags_per_mack(128, 40) == 6);
   CHECK(tags_per_mack(256, 40) == 4);
   CHECK(tags_per_mack(96, 20) == 10);
   for(unsigned lk : {96u, 104u, 112u, 120u, 128u, 160u, 192u, 224u, 256u}) {
      for(unsigned lt : {20u, 24u, 28u, 32u, 40u}) {
         const unsigned nt = tags_per_mack(lk, lt);
         CHECK(nt >= 4);
         CHECK(nt <= 10);
      }
   }
}

TEST_CASE("MACK build and parse") {
   const auto c = TeslaChain::generate(params(128, 20), counting_seed(128));
   const auto& p = c.params();
   std::vector<Tag> entries;
   for(uint8_t k = 1; k < 6; ++k) {
      entries.push_back(make_tag(p, c.key_at(5), Bytes{k}, {3, 0, k}));
   }
   const auto m = build_mack(c, 5, 0x123456789AULL, entries, 1, 3);
   CHECK(m.key == c.key(4));
   const auto bits = serialize_mack(m, p);
   CHECK(bits.size() == 480);
   const auto back = parse_mack(bits, p);
   CHECK(back.tag0 == m.tag0);
   CHECK(back.macseq == m.macseq);
   CHECK(back.key == m.key);
   REQUIRE(back.tags.size() == 5);
   CHECK(back.tags[4].bits == entries[4].bits);

   const auto slow = build_mack(c, 15, 0, entries, 10, 3);
   CHECK(slow.key == c.key(5));
   CHECK(code_of([&] { build_mack(c, 5, 0, entries, 10, 3); }) == ErrorCode::ChainExhausted);
   CHECK(code_of([&] { build_mack(c, 21, 0, entries, 1, 3); }) == ErrorCode::ChainExhausted);
   auto seven = entries;
   seven.push_back(entries[0]);
   CHECK(code_of([&] { build_mack(c, 5, 0, seven, 1, 3); }) == ErrorCode::TooManyTags);

   const auto zero = parse_mack(BitString(480), p);
   CHECK(zero.tag0 == 0);
   CHECK(zero.macseq == 0);
   CHECK(zero.key.all_zero());
   CHECK(code_of([&] { parse_mack(BitString(479), p); }) == ErrorCode::BadLength);
   BitString padded = bits;
   padded.set(479, true);
   CHECK(code_of([&] { parse_mack(padded, p); }) == ErrorCode::MalformedPadding);
}

TEST_CASE("MACK round trip over random messages") {
   std::mt19937_64 rng(9);
   for(int trial = 0; trial < 1000; ++trial) {
      const unsigned lks[] = {96, 128, 160, 192, 256};
      const unsigned lts[] = {20, 24, 28, 32, 40};
      auto p = params(lks[rng() % 5], 1);
      p.tag_bits = lts[rng() % 5];
      MackMessage m;
      m.tag0 = rng() & ((uint64_t{1} << p.tag_bits) - 1);
      m.macseq = static_cast<uint16_t>(rng() & 0xFFF);
      for(unsigned k = 1; k < p.tags_per_mack(); ++k) {
         m.tags.push_back({rng() & ((uint64_t{1} << p.tag_bits) - 1), TagInfo::unpack(static_cast<uint16_t>(rng()))});
      }
      Bytes key(p.key_bits / 8);
      for(auto& x : key) {
         x = static_cast<uint8_t>(rng());
      }
      m.key = BitString::from_bytes(key);
      const auto back = parse_mack(serialize_mack(m, p), p);
      CHECK(serialize_mack(back, p) == serialize_mack(m, p));
   }
}

TEST_CASE("receiver tag verification") {
   const auto c = TeslaChain::generate(params(128, 20), counting_seed(128));
   const auto& p = c.params();
   std::vector<PendingTag> pending;
   for(uint8_t k = 0; k < 4; ++k) {
      const Bytes data = {k, 1, 2};
      pending.push_back({make_tag(p, c.key_at(7), data, {1, 0, k}), data, 7});
   }
   const TeslaKey anchor{0, c.root_key()};
   for(auto v : verify_tags(p, pending, c.key_at(7), anchor)) {
      CHECK(v == Verdict::Authentic);
   }
   auto tampered = pending;
   tampered[2].data[0] ^= 0x80;
   const auto vt = verify_tags(p, tampered, c.key_at(7), anchor);
   CHECK(vt[2] == Verdict::Forged);
   CHECK(vt[1] == Verdict::Authentic);
   BitString bad = c.key(7);
   bad.set(0, !bad.get(0));
   for(auto v : verify_tags(p, pending, {7, bad}, anchor)) {
      CHECK(v == Verdict::KeyUnverified);
   }
}

TEST_CASE("chain dump") {
   const auto c = TeslaChain::generate(params(128, 10), counting_seed(128));
   std::stringstream s;
   write_chain_dump(s, c);
   const std::string text = s.str();
   CHECK(text.starts_with("l_K=128 N=10 hash=SHA-256 cid=0"));
   const auto dump = read_chain_dump(s);
   CHECK(dump.keys.size() == 11);
   CHECK(verify_chain_dump(dump) == -1);
   auto broken = dump;
   broken.keys[4].set(3, !broken.keys[4].get(3));
   CHECK(verify_chain_dump(broken) == 4);
}
