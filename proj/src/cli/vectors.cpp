#include <osnma/cli.hpp>

#include <osnma/bitgrid.hpp>
#include <osnma/crypto.hpp>
#include <osnma/dsm.hpp>
#include <osnma/error.hpp>
#include <osnma/sigscheme.hpp>
#include <osnma/tesla.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#ifndef OSNMA_LAB_DEFAULT_VECTORS
#define OSNMA_LAB_DEFAULT_VECTORS "vectors"
#endif

namespace osnma::cli {

namespace {

using bitgrid::BitString;
using KeyValues = std::map<std::string, std::string>;

struct Mismatch {
      std::string what;
};

void expect(bool cond, const std::string& what) {
   if(!cond) {
      throw Mismatch{what};
   }
}

std::ifstream open(const std::filesystem::path& p) {
   std::ifstream in(p);
   if(!in) {
      throw Mismatch{"cannot open " + p.string()};
   }
   return in;
}

// "name value" per line; a leading "params" line is split into its own tokens.
KeyValues read_kv(const std::filesystem::path& p) {
   auto in = open(p);
   KeyValues kv;
   std::string line;
   while(std::getline(in, line)) {
      std::istringstream ls(line);
      std::string key;
      if(!(ls >> key)) {
         continue;
      }
      if(key == "params") {
         std::string tok;
         while(ls >> tok) {
            const auto eq = tok.find('=');
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
         }
         continue;
      }
      std::string value;
      ls >> value;
      kv[key] = value;
   }
   return kv;
}

const std::string& at(const KeyValues& kv, const std::string& k) {
   const auto it = kv.find(k);
   if(it == kv.end()) {
      throw Mismatch{"missing field " + k};
   }
   return it->second;
}

unsigned num(const KeyValues& kv, const std::string& k) {
   return static_cast<unsigned>(std::stoul(at(kv, k)));
}

Bytes hex(const KeyValues& kv, const std::string& k) {
   return bitgrid::from_hex(at(kv, k));
}

BitString hex_bits(const std::string& h) {
   return BitString::from_hex(h);
}

void check_chain(const std::filesystem::path& p) {
   auto in = open(p);
   const auto dump = tesla::read_chain_dump(in);
   expect(tesla::verify_chain_dump(dump) == -1, "chain links");
   const auto chain = tesla::TeslaChain::generate(dump.params, dump.keys.back());
   for(uint32_t i = 0; i <= chain.length(); ++i) {
      expect(chain.key(i) == dump.keys[i], "key " + std::to_string(i));
   }
}

void check_mack(const std::filesystem::path& p) {
   const auto kv = read_kv(p);
   tesla::TeslaParams params;
   params.key_bits = num(kv, "l_K");
   params.tag_bits = num(kv, "l_T");
   params.hash = parse_hash_function(at(kv, "hash"));
   params.mac = parse_mac_function(at(kv, "mac"));
   params.chain_id = static_cast<uint8_t>(num(kv, "cid"));
   params.chain_length = num(kv, "N");
   params.start_time = bitgrid::GstTime{num(kv, "wn"), num(kv, "tow")};
   const auto chain = tesla::TeslaChain::generate(params, BitString::from_bytes(hex(kv, "seed")));
   const uint32_t index = num(kv, "index");
   const uint32_t delay = num(kv, "delay");
   const uint8_t prn = static_cast<uint8_t>(num(kv, "prn"));
   const unsigned nt = params.tags_per_mack();

   std::vector<tesla::Tag> tags;
   for(unsigned j = 0; j < nt; ++j) {
      const auto info = tesla::TagInfo::unpack(static_cast<uint16_t>(std::stoul(at(kv, "info" + std::to_string(j)), nullptr, 16)));
      const auto tag = tesla::make_tag(params, chain.key_at(index), hex(kv, "data" + std::to_string(j)), info);
      expect(tag.bits == std::stoull(at(kv, "tag" + std::to_string(j)), nullptr, 16), "tag " + std::to_string(j));
      tags.push_back(tag);
   }
   const std::vector<tesla::Tag> entries(tags.begin() + 1, tags.end());
   const auto built = tesla::build_mack(chain, index, tags[0].bits, entries, delay, prn);
   expect(built.macseq == num(kv, "macseq"), "MACSEQ");
   expect(built.key == BitString::from_bytes(hex(kv, "key")), "disclosed key");
   const auto bits = tesla::serialize_mack(built, params);
   expect(bits.to_hex() == at(kv, "mack"), "MACK serialization");
   const auto parsed = tesla::parse_mack(hex_bits(at(kv, "mack")), params);
   expect(parsed.tag0 == built.tag0 && parsed.macseq == built.macseq && parsed.key == built.key, "MACK parse");
   expect(parsed.tags.size() == entries.size(), "MACK tag count");
   for(size_t j = 0; j < entries.size(); ++j) {
      expect(parsed.tags[j].bits == entries[j].bits && parsed.tags[j].info.packed() == entries[j].info.packed(),
             "parsed tag " + std::to_string(j + 1));
   }
}

void check_merkle(const std::filesystem::path& p) {
   auto in = open(p);
   const auto tree = dsm::read_merkle_file(in);
   std::ostringstream out;
   dsm::write_merkle_file(out, tree);
   auto again = open(p);
   std::stringstream original;
   original << again.rdbuf();
   expect(out.str() == original.str(), "Merkle file round trip");
}

void check_pkr(const std::filesystem::path& p) {
   const auto kv = read_kv(p);
   dsm::DsmPkr want;
   want.npkt = static_cast<uint8_t>(num(kv, "npkt"));
   want.npkid = static_cast<uint8_t>(num(kv, "npkid"));
   want.npk = hex(kv, "npk");
   for(unsigned j = 0; j < want.path.size(); ++j) {
      const Bytes node = hex(kv, "path" + std::to_string(j));
      expect(node.size() == 32, "path node size");
      std::copy(node.begin(), node.end(), want.path[j].begin());
   }
   want.nb = static_cast<uint8_t>(*dsm::blocks_for(dsm::pkr_length(want.npk.size() * 8), dsm::BidMode::Nominal) - 1);
   expect(dsm::serialize_dsm_pkr(want).to_hex() == at(kv, "dsm"), "DSM-PKR serialization");
   const auto parsed = dsm::parse_dsm_pkr(hex_bits(at(kv, "dsm")), sig::NpktRegistry{});
   expect(parsed == want, "DSM-PKR parse");
   const Bytes root = hex(kv, "root");
   dsm::Hash256 r{};
   std::copy(root.begin(), root.end(), r.begin());
   expect(dsm::verify_pkr(parsed, r), "Merkle path");
   auto bad = parsed;
   bad.npk[1] ^= 0x01;
   expect(!dsm::verify_pkr(bad, r), "tampered key accepted");
}

void check_kroot(const std::filesystem::path& p) {
   const auto kv = read_kv(p);
   const bool p256 = at(kv, "curve") == "secp256r1";
   const auto provider = sig::make_provider(p256 ? "ECDSA-P256" : "ECDSA-P521");
   const auto curve = p256 ? sig::ecdsa::Curve::P256 : sig::ecdsa::Curve::P521;
   const size_t rlen = p256 ? 32 : 66;
   std::string dhex = at(kv, "d");
   dhex.insert(0, rlen * 2 - dhex.size(), '0');
   const Bytes d = bitgrid::from_hex(dhex);
   const Bytes pk = hex(kv, "pk");
   expect(sig::ecdsa::public_from_private(curve, d) == pk, "public key");

   dsm::NmaHeader header = dsm::NmaHeader::decode(static_cast<uint8_t>(std::stoul(at(kv, "header"), nullptr, 16)));
   dsm::DsmKroot k;
   k.pkid = static_cast<uint8_t>(num(kv, "pkid"));
   k.cidkr = static_cast<uint8_t>(num(kv, "cid"));
   k.hf = static_cast<uint8_t>(num(kv, "hf"));
   k.mf = static_cast<uint8_t>(num(kv, "mf"));
   k.ks = static_cast<uint8_t>(num(kv, "ks"));
   k.ts = static_cast<uint8_t>(num(kv, "ts"));
   k.maclt = static_cast<uint8_t>(num(kv, "maclt"));
   k.wn = static_cast<uint16_t>(num(kv, "wn"));
   k.towh = static_cast<uint8_t>(num(kv, "towh"));
   k.alpha = std::stoull(at(kv, "alpha"), nullptr, 16);
   k.kroot = BitString::from_bytes(hex(kv, "kroot"));
   const Bytes msg = dsm::kroot_signed_message(header, k);
   expect(msg == hex(kv, "message"), "signed message");
   k.ds = provider->sign(d, msg);
   expect(k.ds == hex(kv, "ds"), "deterministic signature");
   k.nb = static_cast<uint8_t>(
      *dsm::blocks_for(dsm::kroot_length(k.kroot.size(), k.ds.size() * 8), dsm::BidMode::Nominal) - 1);
   expect(dsm::serialize_dsm_kroot(k).to_hex() == at(kv, "dsm"), "DSM-KROOT serialization");
   const auto parsed = dsm::parse_dsm_kroot(hex_bits(at(kv, "dsm")), provider->sig_bits());
   expect(parsed == k, "DSM-KROOT parse");
   expect(dsm::verify_dsm_kroot(parsed, header, *provider, pk), "signature verification");
   header.cid = static_cast<uint8_t>((header.cid + 1) % 4);
   expect(!dsm::verify_dsm_kroot(parsed, header, *provider, pk), "signature ignores the NMA header");
}

void check_subframes(const std::filesystem::path& p) {
   auto in = open(p);
   const auto subframes = bitgrid::read_page_vectors(in);
   auto fin = open(p.parent_path() / "subframes_fields.txt");
   std::string line;
   size_t i = 0;
   while(std::getline(fin, line)) {
      if(line.empty()) {
         continue;
      }
      expect(i < subframes.size(), "more field lines than subframes");
      std::istringstream ls(line);
      std::string hk, mk;
      ls >> hk >> mk;
      const auto payload = bitgrid::assemble_subframe(subframes[i]);
      expect("hkroot=" + payload.hkroot.to_hex() == hk, "HKROOT of subframe " + std::to_string(i));
      expect("mack=" + payload.mack.to_hex() == mk, "MACK of subframe " + std::to_string(i));
      expect(bitgrid::disassemble_subframe(payload) == subframes[i], "pages of subframe " + std::to_string(i));
      ++i;
   }
   expect(i == subframes.size() && i > 0, "subframe count");
}

}  // namespace

std::filesystem::path vectors_dir() {
   if(const char* env = std::getenv("OSNMA_LAB_VECTORS"); env && *env) {
      return env;
   }
   return OSNMA_LAB_DEFAULT_VECTORS;
}

std::vector<VectorCheck> check_vectors(const std::filesystem::path& dir) {
   std::vector<std::filesystem::path> files;
   if(std::filesystem::is_directory(dir)) {
      for(const auto& e : std::filesystem::directory_iterator(dir)) {
         if(e.path().extension() == ".txt" && e.path().filename() != "subframes_fields.txt") {
            files.push_back(e.path());
         }
      }
   }
   std::sort(files.begin(), files.end());
   std::vector<VectorCheck> out;
   for(const auto& f : files) {
      VectorCheck c;
      c.file = f.filename().string();
      const std::string name = c.file;
      try {
         if(name.starts_with("chain")) {
            check_chain(f);
         } else if(name.starts_with("mack")) {
            check_mack(f);
         } else if(name == "merkle.txt") {
            check_merkle(f);
         } else if(name.starts_with("dsm_pkr")) {
            check_pkr(f);
         } else if(name.starts_with("dsm_kroot")) {
            check_kroot(f);
         } else if(name == "subframes.txt") {
            check_subframes(f);
         } else {
            c.detail = "unrecognised vector file";
            out.push_back(c);
            continue;
         }
         c.ok = true;
      } catch(const Mismatch& m) {
         c.detail = m.what;
      } catch(const std::exception& e) {
         c.detail = e.what();
      }
      out.push_back(c);
   }
   return out;
}

}  // namespace osnma::cli
