#include <osnma/tesla.hpp>

#include <osnma/error.hpp>

#include <istream>
#include <ostream>
#include <sstream>

namespace osnma::tesla {

unsigned tags_per_mack(unsigned key_bits, unsigned tag_bits) {
   if(key_bits >= bitgrid::kMackBits) {
      return 0;
   }
   return (bitgrid::kMackBits - key_bits) / (tag_bits + kTagInfoBits);
}

void TeslaParams::validate() const {
   if(key_bits < kMinKeyBits || key_bits > kMaxKeyBits) {
      throw Error(ErrorCode::InvalidParams,
                  "l_K=" + std::to_string(key_bits) + " outside " + std::to_string(kMinKeyBits) + ".." +
                     std::to_string(kMaxKeyBits));
   }
   if(key_bits % 8 != 0) {
      throw Error(ErrorCode::InvalidParams, "l_K must be a whole number of bytes");
   }
   const unsigned min_tag = scaled ? 1 : kMinTagBits;
   if(tag_bits < min_tag || tag_bits > kMaxTagBits) {
      throw Error(ErrorCode::InvalidParams,
                  "l_T=" + std::to_string(tag_bits) + " outside " + std::to_string(min_tag) + ".." +
                     std::to_string(kMaxTagBits));
   }
   const unsigned nt = tags_per_mack();
   if(nt < 1 || (!scaled && (nt < kMinTags || nt > kMaxTags))) {
      throw Error(ErrorCode::InvalidParams, "tag count n_t=" + std::to_string(nt) + " outside 4..10");
   }
   if(chain_id > 3) {
      throw Error(ErrorCode::InvalidParams, "CID is a 2-bit field");
   }
   if(chain_length < 1) {
      throw Error(ErrorCode::InvalidParams, "chain length must be at least 1");
   }
   start_time.validate();
}

GstTime TeslaParams::key_time(uint32_t index) const {
   const int64_t offset = (static_cast<int64_t>(index) - 1) * bitgrid::kSubframeSeconds;
   return start_time.plus_seconds(offset);
}

BitString derive(const TeslaParams& params, const BitString& key, uint32_t index) {
   Bytes input = key.bytes();
   input.push_back(params.chain_id);
   const uint32_t gst = params.key_time(index).packed();
   input.push_back(static_cast<uint8_t>(gst >> 24));
   input.push_back(static_cast<uint8_t>(gst >> 16));
   input.push_back(static_cast<uint8_t>(gst >> 8));
   input.push_back(static_cast<uint8_t>(gst));
   const Bytes h = crypto::hash(params.hash, input);
   return BitString::from_bytes(h, params.key_bits);
}

BitString derive_down(const TeslaParams& params, BitString key, uint32_t from_index, uint32_t to_index) {
   for(uint32_t i = from_index; i > to_index; --i) {
      key = derive(params, key, i);
   }
   return key;
}

TeslaChain TeslaChain::generate(const TeslaParams& params, const BitString& seed) {
   params.validate();
   if(seed.size() != params.key_bits) {
      throw Error(ErrorCode::BadSeedLength,
                  "seed has " + std::to_string(seed.size()) + " bits, l_K is " + std::to_string(params.key_bits));
   }
   TeslaChain chain;
   chain.m_params = params;
   chain.m_keys.resize(size_t{params.chain_length} + 1);
   chain.m_keys[params.chain_length] = seed;
   for(uint32_t i = params.chain_length; i >= 1; --i) {
      chain.m_keys[i - 1] = derive(params, chain.m_keys[i], i);
   }
   return chain;
}

const BitString& TeslaChain::key(uint32_t index) const {
   if(index > m_params.chain_length) {
      throw Error(ErrorCode::ChainExhausted,
                  "key index " + std::to_string(index) + " beyond chain length " +
                     std::to_string(m_params.chain_length));
   }
   return m_keys[index];
}

bool TeslaChain::check() const {
   for(uint32_t i = m_params.chain_length; i >= 1; --i) {
      if(derive(m_params, m_keys[i], i) != m_keys[i - 1]) {
         return false;
      }
   }
   return true;
}

bool verify_key(const TeslaParams& params, const BitString& candidate, uint32_t i, const TeslaKey& trusted) {
   if(i <= trusted.index) {
      throw Error(ErrorCode::IndexOrder,
                  "candidate index " + std::to_string(i) + " must exceed trusted index " +
                     std::to_string(trusted.index));
   }
   if(candidate.size() != params.key_bits) {
      return false;
   }
   const BitString folded = derive_down(params, candidate, i, trusted.index);
   return crypto::constant_time_equal(folded.bytes(), trusted.bits.bytes());
}

bool is_known_adkd(uint8_t code) {
   return code == 0 || code == 4 || code == 12;
}

uint32_t adkd_delay(uint8_t code) {
   return code == static_cast<uint8_t>(Adkd::SlowMac) ? 10 : 1;
}

uint16_t TagInfo::packed() const {
   return static_cast<uint16_t>((prn << 8) | ((adkd & 0x0F) << 4) | (cop & 0x0F));
}

TagInfo TagInfo::unpack(uint16_t v) {
   return TagInfo{static_cast<uint8_t>(v >> 8), static_cast<uint8_t>((v >> 4) & 0x0F), static_cast<uint8_t>(v & 0x0F)};
}

uint64_t truncate_tag(std::span<const uint8_t> mac, unsigned tag_bits) {
   return BitString::from_bytes(mac).read_uint(0, tag_bits);
}

Tag make_tag(const TeslaParams& params, const TeslaKey& key, std::span<const uint8_t> data, TagInfo info) {
   if(key.index == 0) {
      throw Error(ErrorCode::RootKeySigning, "the root key never authenticates data");
   }
   if(key.bits.size() != params.key_bits) {
      throw Error(ErrorCode::BadLength, "tag key is not l_K bits long");
   }
   if(info.adkd > 15 || info.cop > 15) {
      throw Error(ErrorCode::Overflow, "ADKD and COP are 4-bit fields");
   }
   Bytes input;
   input.reserve(data.size() + 2);
   const uint16_t ti = info.packed();
   input.push_back(static_cast<uint8_t>(ti >> 8));
   input.push_back(static_cast<uint8_t>(ti));
   input.insert(input.end(), data.begin(), data.end());
   const Bytes mac = crypto::mac(params.mac, key.bits.bytes(), input);
   return Tag{truncate_tag(mac, params.tag_bits), info};
}

uint16_t compute_macseq(const TeslaParams& params,
                        const BitString& key,
                        GstTime gst,
                        uint8_t prn,
                        std::span<const Tag> tags) {
   Bytes input;
   const uint32_t g = gst.packed();
   input.push_back(static_cast<uint8_t>(g >> 24));
   input.push_back(static_cast<uint8_t>(g >> 16));
   input.push_back(static_cast<uint8_t>(g >> 8));
   input.push_back(static_cast<uint8_t>(g));
   input.push_back(prn);
   for(const auto& t : tags) {
      const uint16_t ti = t.info.packed();
      input.push_back(static_cast<uint8_t>(ti >> 8));
      input.push_back(static_cast<uint8_t>(ti));
   }
   const Bytes mac = crypto::mac(params.mac, key.bytes(), input);
   return static_cast<uint16_t>(truncate_tag(mac, kMacseqBits));
}

BitString serialize_mack(const MackMessage& msg, const TeslaParams& params) {
   const unsigned nt = params.tags_per_mack();
   if(msg.tags.size() + 1 > nt) {
      throw Error(ErrorCode::TooManyTags,
                  std::to_string(msg.tags.size() + 1) + " tags exceed n_t=" + std::to_string(nt));
   }
   if(msg.tags.size() + 1 < nt) {
      throw Error(ErrorCode::TooFewTags,
                  std::to_string(msg.tags.size() + 1) + " tags, n_t=" + std::to_string(nt));
   }
   if(msg.key.size() != params.key_bits) {
      throw Error(ErrorCode::BadLength, "disclosed key is not l_K bits long");
   }
   bitgrid::BitWriter w;
   w.write(msg.tag0, params.tag_bits);
   w.write(msg.macseq, kMacseqBits);
   w.write(0, 4);
   for(const auto& t : msg.tags) {
      w.write(t.bits, params.tag_bits);
      w.write(t.info.packed(), kTagInfoBits);
   }
   w.write(msg.key);
   w.write_zeros(bitgrid::kMackBits - w.size());
   return w.take();
}

MackMessage parse_mack(const BitString& bits, const TeslaParams& params) {
   if(bits.size() != bitgrid::kMackBits) {
      throw Error(ErrorCode::BadLength, "MACK must be 480 bits, got " + std::to_string(bits.size()));
   }
   const unsigned nt = params.tags_per_mack();
   bitgrid::BitReader r(bits);
   MackMessage msg;
   msg.tag0 = r.read(params.tag_bits);
   msg.macseq = static_cast<uint16_t>(r.read(kMacseqBits));
   if(r.read(4) != 0) {
      throw Error(ErrorCode::MalformedPadding, "reserved MACK header bits set");
   }
   for(unsigned i = 1; i < nt; ++i) {
      Tag t;
      t.bits = r.read(params.tag_bits);
      t.info = TagInfo::unpack(static_cast<uint16_t>(r.read(kTagInfoBits)));
      msg.tags.push_back(t);
   }
   msg.key = r.read_bits(params.key_bits);
   if(!r.read_bits(r.remaining()).all_zero()) {
      throw Error(ErrorCode::MalformedPadding, "non-zero MACK padding");
   }
   return msg;
}

MackMessage build_mack(const TeslaChain& chain,
                       uint32_t index,
                       uint64_t tag0,
                       std::span<const Tag> tags,
                       uint32_t delay,
                       uint8_t prn) {
   const auto& params = chain.params();
   if(delay != 1 && delay != 10) {
      throw Error(ErrorCode::InvalidParams, "disclosure delay must be 1 or 10 subframes");
   }
   if(index < 1 || index > chain.length()) {
      throw Error(ErrorCode::ChainExhausted,
                  "subframe key index " + std::to_string(index) + " outside 1.." + std::to_string(chain.length()));
   }
   if(index < delay) {
      throw Error(ErrorCode::ChainExhausted, "disclosure would precede the chain root");
   }
   const unsigned nt = params.tags_per_mack();
   if(tags.size() + 1 > nt) {
      throw Error(ErrorCode::TooManyTags,
                  std::to_string(tags.size() + 1) + " tags exceed n_t=" + std::to_string(nt));
   }
   if(tags.size() + 1 < nt) {
      throw Error(ErrorCode::TooFewTags, std::to_string(tags.size() + 1) + " tags, n_t=" + std::to_string(nt));
   }
   MackMessage msg;
   msg.tag0 = tag0;
   msg.tags.assign(tags.begin(), tags.end());
   msg.macseq = compute_macseq(params, chain.key(index), params.key_time(index), prn, tags);
   msg.key = chain.key(index - delay);
   return msg;
}

std::string_view to_string(Verdict v) {
   switch(v) {
      case Verdict::Authentic:
         return "Authentic";
      case Verdict::Forged:
         return "Forged";
      case Verdict::KeyUnverified:
         return "KeyUnverified";
   }
   return "?";
}

std::vector<Verdict> verify_tags(const TeslaParams& params,
                                 std::span<const PendingTag> pending,
                                 const TeslaKey& disclosed,
                                 const TeslaKey& anchor) {
   bool key_ok = false;
   if(disclosed.index == anchor.index) {
      key_ok = disclosed.bits == anchor.bits;
   } else if(disclosed.index > anchor.index) {
      key_ok = verify_key(params, disclosed.bits, disclosed.index, anchor);
   }
   std::vector<Verdict> out;
   out.reserve(pending.size());
   for(const auto& p : pending) {
      if(!key_ok || p.key_index != disclosed.index || disclosed.index == 0) {
         out.push_back(Verdict::KeyUnverified);
         continue;
      }
      const Tag expect = make_tag(params, disclosed, p.data, p.tag.info);
      out.push_back(expect.bits == p.tag.bits ? Verdict::Authentic : Verdict::Forged);
   }
   return out;
}

// ---------------------------------------------------------------- chain dump

void write_chain_dump(std::ostream& out, const TeslaChain& chain) {
   const auto& p = chain.params();
   out << "l_K=" << p.key_bits << " N=" << p.chain_length << " hash=" << to_string(p.hash)
       << " cid=" << unsigned{p.chain_id} << " wn=" << p.start_time.week << " tow=" << p.start_time.tow << "\n";
   for(uint32_t i = 0; i <= chain.length(); ++i) {
      out << chain.key(i).to_hex() << "\n";
   }
}

ChainDump read_chain_dump(std::istream& in) {
   std::string header;
   if(!std::getline(in, header)) {
      throw Error(ErrorCode::InvalidParams, "empty chain dump");
   }
   ChainDump dump;
   bool have_lk = false, have_n = false, have_hash = false, have_cid = false;
   std::istringstream hs(header);
   std::string tok;
   while(hs >> tok) {
      const auto eq = tok.find('=');
      if(eq == std::string::npos) {
         throw Error(ErrorCode::InvalidParams, "malformed header token '" + tok + "'");
      }
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      try {
         if(key == "l_K") {
            dump.params.key_bits = static_cast<unsigned>(std::stoul(val));
            have_lk = true;
         } else if(key == "N") {
            dump.params.chain_length = static_cast<uint32_t>(std::stoul(val));
            have_n = true;
         } else if(key == "hash") {
            dump.params.hash = parse_hash_function(val);
            have_hash = true;
         } else if(key == "cid") {
            dump.params.chain_id = static_cast<uint8_t>(std::stoul(val));
            have_cid = true;
         } else if(key == "wn") {
            dump.params.start_time.week = static_cast<uint32_t>(std::stoul(val));
         } else if(key == "tow") {
            dump.params.start_time.tow = static_cast<uint32_t>(std::stoul(val));
         } else {
            throw Error(ErrorCode::InvalidParams, "unknown header field '" + key + "'");
         }
      } catch(const std::logic_error&) {
         throw Error(ErrorCode::InvalidParams, "bad value in header token '" + tok + "'");
      }
   }
   if(!have_lk || !have_n || !have_hash || !have_cid) {
      throw Error(ErrorCode::InvalidParams, "chain dump header needs l_K, N, hash and cid");
   }
   dump.params.validate();
   std::string line;
   while(std::getline(in, line)) {
      if(line.empty()) {
         continue;
      }
      dump.keys.push_back(BitString::from_hex(line, dump.params.key_bits));
      if(line.size() * 4 != dump.params.key_bits) {
         throw Error(ErrorCode::BadHex, "key line does not hold exactly l_K bits");
      }
   }
   if(dump.keys.size() != size_t{dump.params.chain_length} + 1) {
      throw Error(ErrorCode::InvalidParams,
                  "expected " + std::to_string(dump.params.chain_length + 1) + " keys, found " +
                     std::to_string(dump.keys.size()));
   }
   return dump;
}

long verify_chain_dump(const ChainDump& dump) {
   for(uint32_t i = 1; i < dump.keys.size(); ++i) {
      if(derive(dump.params, dump.keys[i], i) != dump.keys[i - 1]) {
         return static_cast<long>(i);
      }
   }
   return -1;
}

}  // namespace osnma::tesla
