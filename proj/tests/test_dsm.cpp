#include <doctest.h>

#include <osnma/bitgrid.hpp>
#include <osnma/dsm.hpp>
#include <osnma/error.hpp>
#include <osnma/sigscheme.hpp>
#include <osnma/tesla.hpp>

#include <algorithm>
#include <random>
#include <sstream>

using namespace osnma;
using namespace osnma::dsm;

namespace {

ErrorCode code_of(auto&& fn) {
   try {
      fn();
   } catch(const Error& e) {
      return e.code();
   }
   FAIL("expected an osnma::Error");
   return ErrorCode::Overflow;
}

void put(BitString& b, size_t pos, unsigned width, uint64_t v) {
   for(unsigned i = 0; i < width; ++i) {
      b.set(pos + i, (v >> (width - 1 - i)) & 1);
   }
}

Bytes str(std::string_view s) {
   return Bytes(s.begin(), s.end());
}

tesla::TeslaChain hour_chain(unsigned lk, uint32_t tow = 7200) {
   tesla::TeslaParams p;
   p.key_bits = lk;
   p.chain_length = 40;
   p.chain_id = 2;
   p.start_time = bitgrid::GstTime{1201, tow};
   return tesla::TeslaChain::generate(p, bitgrid::BitString::from_bytes(crypto::expand("chain", str("x"), lk / 8)));
}

std::vector<MerkleLeaf> leaves() {
   std::vector<MerkleLeaf> out;
   const auto p256 = sig::make_provider("ECDSA-P256");
   for(int i = 0; i < 16; ++i) {
      out.push_back({1, p256->keygen(Bytes{static_cast<uint8_t>(i)}).public_key});
   }
   return out;
}

BitString reassemble(const BitString& payload, BidMode mode, uint32_t shuffle_seed) {
   auto blocks = segment(payload, mode);
   std::vector<uint16_t> order(blocks.size());
   for(size_t i = 0; i < order.size(); ++i) {
      order[i] = static_cast<uint16_t>(i);
   }
   std::shuffle(order.begin(), order.end(), std::mt19937(shuffle_seed));
   DsmBlockStream s(4, mode);
   AccumulateResult r;
   for(auto bid : order) {
      r = s.accumulate(4, bid, blocks[bid]);
   }
   REQUIRE(r.status == AccumulateStatus::Complete);
   return r.payload;
}

}  // namespace

TEST_CASE("message lengths") {
   CHECK(kroot_length(128, 512) == 832);
   CHECK(kroot_length(256, 1056) == 1456);
   CHECK(pkr_length(264) == 1352);
   CHECK(pkr_length(7176) == 8216);
   CHECK(blocks_for(832, BidMode::Nominal) == 8u);
   CHECK(blocks_for(8216, BidMode::Nominal) == std::nullopt);
   CHECK(blocks_for(8216, BidMode::Extended) == 82u);
   CHECK(blocks_for(kExtendedNetBits, BidMode::Extended) == 128u);
   CHECK(blocks_for(kExtendedNetBits + 1, BidMode::Extended) == std::nullopt);
}

TEST_CASE("field codes and NMA header") {
   const CodeTables t;
   CHECK(t.key_bits(4) == 128);
   CHECK(t.key_bits(8) == 256);
   CHECK(t.tag_bits(9) == 40);
   CHECK(t.ts_code(20) == 5);
   CHECK(code_of([&] { t.key_bits(9); }) == ErrorCode::ReservedCode);
   CHECK(code_of([&] { t.tag_bits(4); }) == ErrorCode::ReservedCode);
   CodeTables ext;
   ext.ts_extension[1] = 10;
   CHECK(ext.tag_bits(1) == 10);
   CHECK(ext.ts_code(10) == 1);
   CHECK(lookup_maclt(2).delay == 10);
   CHECK(code_of([] { lookup_maclt(0); }) == ErrorCode::ReservedCode);

   const NmaHeader h{NmaStatus::Operational, 2, Cpks::EndOfChain};
   CHECK(h.encode() == 0xA4);
   CHECK(NmaHeader::decode(0xA4) == h);
   CHECK(code_of([] { NmaHeader::decode(0x80); }) == ErrorCode::ReservedCode);
   CHECK(code_of([] { NmaHeader::decode(0x8E); }) == ErrorCode::ReservedCode);
   CHECK(code_of([] { NmaHeader::decode(0x83); }) == ErrorCode::MalformedDsm);
}

TEST_CASE("CPKS lifecycle") {
   NmaHeader h{NmaStatus::Operational, 3, Cpks::Nominal};
   h = cpks_transition(h, LifecycleEvent::ChainRenewal);
   CHECK(h.cpks == Cpks::EndOfChain);
   CHECK(h.cid == 0);
   CHECK(code_of([&] { cpks_transition(h, LifecycleEvent::ChainRenewal); }) == ErrorCode::InvalidTransition);
   h = cpks_transition(h, LifecycleEvent::ChainRevocation);
   CHECK(h.cpks == Cpks::ChainRevoked);
   CHECK(h.cid == 1);
   CHECK(code_of([&] { cpks_transition(h, LifecycleEvent::NewPublicKey); }) == ErrorCode::InvalidTransition);
   h = cpks_transition(h, LifecycleEvent::PublicKeyRevocation);
   h = cpks_transition(h, LifecycleEvent::NewMerkleTree);
   CHECK(h.cpks == Cpks::NewMerkleTree);
   CHECK(cpks_transition(h, LifecycleEvent::Nominal).cpks == Cpks::Nominal);
}

TEST_CASE("HKROOT and block stream") {
   std::mt19937_64 rng(4);
   for(auto mode : {BidMode::Nominal, BidMode::Extended}) {
      BitString block;
      for(unsigned i = 0; i < block_payload_bits(mode); ++i) {
         block.push_back(rng() & 1);
      }
      const HkrootMessage m{{NmaStatus::Test, 1, Cpks::Nominal}, 9, 13, block};
      const auto bits = serialize_hkroot(m, mode);
      CHECK(bits.size() == 120);
      CHECK(parse_hkroot(bits, mode) == m);
   }
   CHECK(is_pkr_dsm_id(12));
   CHECK_FALSE(is_pkr_dsm_id(11));

   BitString payload(3 * 104);
   put(payload, 0, 7, 2);  // NB = 2 means three blocks
   payload.set(200, true);
   const auto blocks = segment(payload, BidMode::Nominal);
   REQUIRE(blocks.size() == 3);
   DsmBlockStream s(4, BidMode::Nominal);
   CHECK(s.accumulate(4, 2, blocks[2]).status == AccumulateStatus::Incomplete);
   CHECK_FALSE(s.expected_blocks().has_value());
   CHECK(s.accumulate(4, 2, blocks[2]).status == AccumulateStatus::Incomplete);
   CHECK(s.accumulate(4, 0, blocks[0]).status == AccumulateStatus::Incomplete);
   CHECK(s.expected_blocks() == 3u);
   CHECK(s.accumulate(4, 1, blocks[1]).status == AccumulateStatus::Complete);
   CHECK(s.accumulate(4, 1, blocks[2]).status == AccumulateStatus::Conflict);
   s.reset();
   CHECK(s.accumulate(5, 0, blocks[0]).status == AccumulateStatus::Conflict);
   CHECK(s.accumulate(4, 3, blocks[1]).status == AccumulateStatus::Incomplete);
   s.accumulate(4, 0, blocks[0]);
   CHECK(s.accumulate(4, 1, blocks[1]).status == AccumulateStatus::Conflict);
   s.reset();
   s.accumulate(4, 1, blocks[1]);
   s.accumulate(4, 0, blocks[0]);
   const auto done = s.accumulate(4, 2, blocks[2]);
   CHECK(done.status == AccumulateStatus::Complete);
   CHECK(done.payload == payload);

   CHECK(code_of([] { segment(BitString(100), BidMode::Nominal); }) == ErrorCode::BadLength);
   CHECK(code_of([] { segment(BitString(17 * 104), BidMode::Nominal); }) == ErrorCode::CapacityExceeded);
   CHECK(segment(BitString(150), BidMode::Extended).size() == 2);
}

TEST_CASE("DSM-KROOT with ECDSA") {
   const auto chain = hour_chain(128);
   const auto signer = sig::make_provider("ECDSA-P256");
   const auto kp = signer->keygen(str("operator"));
   KrootFields f;
   f.header = {NmaStatus::Operational, 2, Cpks::Nominal};
   f.pkid = 5;
   f.alpha = 0xABCDEF012345ULL;
   const auto k = build_dsm_kroot(chain, *signer, kp.private_key, f, BidMode::Nominal);
   CHECK(k.nb == 7);
   CHECK(k.towh == 2);
   CHECK(k.ks == 4);
   const auto bits = serialize_dsm_kroot(k);
   CHECK(bits.size() == 832);
   const auto parsed = parse_dsm_kroot(reassemble(bits, BidMode::Nominal, 1), 512);
   CHECK(parsed == k);
   CHECK(verify_dsm_kroot(parsed, f.header, *signer, kp.public_key));
   auto other = f.header;
   other.cpks = Cpks::EndOfChain;
   CHECK_FALSE(verify_dsm_kroot(parsed, other, *signer, kp.public_key));
   auto flipped = parsed;
   flipped.kroot.set(7, !flipped.kroot.get(7));
   CHECK_FALSE(verify_dsm_kroot(flipped, f.header, *signer, kp.public_key));
   const auto p = params_from_kroot(parsed);
   CHECK(p.start_time == chain.params().start_time);
   CHECK(p.chain_id == 2);
   CHECK(tesla::verify_key(p, chain.key(9), 9, {0, parsed.kroot}));

   CHECK(code_of([&] { build_dsm_kroot(hour_chain(128, 7230), *signer, kp.private_key, f, BidMode::Nominal); }) ==
         ErrorCode::InvalidParams);
   CHECK(code_of([&] { parse_dsm_kroot(bits.slice(0, 728), 512); }) == ErrorCode::BadLength);
   BitString dirty = bits;
   dirty.set(831, true);
   CHECK(code_of([&] { parse_dsm_kroot(dirty, 512); }) == ErrorCode::MalformedPadding);
}

TEST_CASE("DSM-KROOT size limits") {
   const auto chain = hour_chain(256);
   const auto falcon = sig::make_provider("Falcon-512");
   const auto kp = falcon->keygen(str("pqc"));
   KrootFields f;
   CHECK(code_of([&] { build_dsm_kroot(chain, *falcon, kp.private_key, f, BidMode::Nominal); }) ==
         ErrorCode::SignatureTooLarge);
   const auto k = build_dsm_kroot(chain, *falcon, kp.private_key, f, BidMode::Extended);
   CHECK(k.nb + 1 == 57);
   const auto parsed = parse_dsm_kroot(reassemble(serialize_dsm_kroot(k), BidMode::Extended, 2), 5328);
   CHECK(parsed == k);
   CHECK(verify_dsm_kroot(parsed, f.header, *falcon, kp.public_key));

   const auto sphincs = sig::make_provider("SPHINCS+-128s");
   const auto skp = sphincs->keygen(str("s"));
   CHECK(code_of([&] { build_dsm_kroot(chain, *sphincs, skp.private_key, f, BidMode::Extended); }) ==
         ErrorCode::SignatureTooLarge);
}

TEST_CASE("Merkle tree and DSM-PKR") {
   const auto ls = leaves();
   const auto tree = MerkleTree::build(ls);
   for(uint8_t id = 0; id < 16; ++id) {
      CHECK(verify_merkle_path(leaf_hash(1, id, ls[id].npk), id, tree.path(id), tree.root()));
      CHECK_FALSE(verify_merkle_path(leaf_hash(1, id, ls[id].npk), id ^ 1, tree.path(id), tree.root()));
   }
   std::stringstream file;
   write_merkle_file(file, tree);
   CHECK(read_merkle_file(file).root() == tree.root());
   std::string text = file.str();
   text[10] = text[10] == '0' ? '1' : '0';
   std::istringstream bad(text);
   CHECK(code_of([&] { read_merkle_file(bad); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([&] { MerkleTree::build(std::span(ls).first(15)); }) == ErrorCode::InvalidParams);

   const auto pkr = build_dsm_pkr(ls[6].npk, 1, 6, tree, BidMode::Nominal);
   CHECK(pkr.nb == 12);
   const auto bits = serialize_dsm_pkr(pkr);
   CHECK(bits.size() == 1352);
   const auto parsed = parse_dsm_pkr(reassemble(bits, BidMode::Nominal, 3), sig::NpktRegistry{});
   CHECK(parsed == pkr);
   CHECK(verify_pkr(parsed, tree.root()));
   auto swapped = parsed;
   swapped.npkid = 7;
   CHECK_FALSE(verify_pkr(swapped, tree.root()));
   CHECK(code_of([&] { build_dsm_pkr(ls[6].npk, 1, 5, tree, BidMode::Nominal); }) == ErrorCode::InvalidParams);

   BitString unassigned = bits;
   put(unassigned, 8, 4, 4);
   CHECK(code_of([&] { parse_dsm_pkr(unassigned, sig::NpktRegistry{}); }) == ErrorCode::UnassignedNpkt);
}

TEST_CASE("DSM-PKR for a post-quantum key") {
   const auto falcon = sig::make_provider("Falcon-512");
   auto ls = leaves();
   ls[9] = {7, falcon->keygen(str("pq")).public_key};
   const auto tree = MerkleTree::build(ls);
   CHECK(code_of([&] { build_dsm_pkr(ls[9].npk, 7, 9, tree, BidMode::Nominal); }) == ErrorCode::KeyTooLarge);
   const auto pkr = build_dsm_pkr(ls[9].npk, 7, 9, tree, BidMode::Extended);
   sig::NpktRegistry reg;
   reg.assign(7, "Falcon-512");
   const auto parsed = parse_dsm_pkr(reassemble(serialize_dsm_pkr(pkr), BidMode::Extended, 4), reg);
   CHECK(parsed == pkr);
   CHECK(verify_pkr(parsed, tree.root()));
}
