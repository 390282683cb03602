#include <osnma/dsm.hpp>

#include <osnma/error.hpp>

#include <istream>
#include <ostream>
#include <sstream>

namespace osnma::dsm {

namespace {

constexpr std::array<unsigned, 9> kKsTable = {96, 104, 112, 120, 128, 160, 192, 224, 256};
constexpr unsigned kFirstTsCode = 5;
constexpr std::array<unsigned, 5> kTsTable = {20, 24, 28, 32, 40};

uint64_t ceil_div(uint64_t a, uint64_t b) {
   return (a + b - 1) / b;
}

// Drops the zero fill that extended-mode reassembly leaves after a message.
BitString trim_fill(const BitString& bits, uint64_t expected, const char* what) {
   if(bits.size() < expected || bits.size() - expected >= kExtendedBlockBits) {
      throw Error(ErrorCode::BadLength,
                  std::string(what) + " length " + std::to_string(bits.size()) + " does not match " +
                     std::to_string(expected));
   }
   if(bits.size() == expected) {
      return bits;
   }
   if(!bits.slice(expected, bits.size() - expected).all_zero()) {
      throw Error(ErrorCode::MalformedPadding, std::string(what) + " has non-zero fill after the message");
   }
   return bits.slice(0, expected);
}

uint8_t nb_for(uint64_t length_bits, BidMode mode, ErrorCode too_large, const char* what) {
   const auto blocks = blocks_for(length_bits, mode);
   if(!blocks) {
      throw Error(too_large,
                  std::string(what) + " of " + std::to_string(length_bits) + " bits exceeds " +
                     std::string(to_string(mode)) + " capacity");
   }
   return static_cast<uint8_t>(*blocks - 1);
}

}  // namespace

std::string_view to_string(BidMode m) {
   return m == BidMode::Nominal ? "nominal" : "extended";
}

unsigned block_payload_bits(BidMode m) {
   return m == BidMode::Nominal ? kBlockBits : kExtendedBlockBits;
}

unsigned max_blocks(BidMode m) {
   return m == BidMode::Nominal ? kNominalMaxBlocks : kExtendedMaxBlocks;
}

std::optional<unsigned> blocks_for(size_t payload_bits, BidMode m) {
   const uint64_t n = ceil_div(payload_bits, block_payload_bits(m));
   if(n > max_blocks(m)) {
      return std::nullopt;
   }
   return static_cast<unsigned>(n);
}

uint64_t kroot_length(uint64_t key_bits, uint64_t ds_bits) {
   return kBlockBits * (1 + ceil_div(key_bits + ds_bits, kBlockBits));
}

uint64_t pkr_length(uint64_t npk_bits) {
   return kBlockBits * ceil_div(kPkrMetadataBits + kMerklePathBits + npk_bits, kBlockBits);
}

// ---------------------------------------------------------------- field codes

unsigned CodeTables::key_bits(uint8_t ks) const {
   if(ks < kKsTable.size()) {
      return kKsTable[ks];
   }
   if(auto it = ks_extension.find(ks); it != ks_extension.end()) {
      return it->second;
   }
   throw Error(ErrorCode::ReservedCode, "KS code " + std::to_string(ks) + " is reserved");
}

unsigned CodeTables::tag_bits(uint8_t ts) const {
   if(ts >= kFirstTsCode && ts < kFirstTsCode + kTsTable.size()) {
      return kTsTable[ts - kFirstTsCode];
   }
   if(auto it = ts_extension.find(ts); it != ts_extension.end()) {
      return it->second;
   }
   throw Error(ErrorCode::ReservedCode, "TS code " + std::to_string(ts) + " is reserved");
}

uint8_t CodeTables::ks_code(unsigned bits) const {
   for(size_t i = 0; i < kKsTable.size(); ++i) {
      if(kKsTable[i] == bits) {
         return static_cast<uint8_t>(i);
      }
   }
   for(const auto& [code, b] : ks_extension) {
      if(b == bits) {
         return code;
      }
   }
   throw Error(ErrorCode::ReservedCode, "no KS code for l_K=" + std::to_string(bits));
}

uint8_t CodeTables::ts_code(unsigned bits) const {
   for(size_t i = 0; i < kTsTable.size(); ++i) {
      if(kTsTable[i] == bits) {
         return static_cast<uint8_t>(kFirstTsCode + i);
      }
   }
   for(const auto& [code, b] : ts_extension) {
      if(b == bits) {
         return code;
      }
   }
   throw Error(ErrorCode::ReservedCode, "no TS code for l_T=" + std::to_string(bits));
}

uint8_t hf_code(HashFunction h) {
   return h == HashFunction::Sha256 ? 0 : 2;
}

HashFunction hash_from_code(uint8_t hf) {
   if(hf == 0) {
      return HashFunction::Sha256;
   }
   if(hf == 2) {
      return HashFunction::Sha3_256;
   }
   throw Error(ErrorCode::ReservedCode, "HF code " + std::to_string(hf) + " is reserved");
}

uint8_t mf_code(MacFunction m) {
   return m == MacFunction::HmacSha256 ? 0 : 1;
}

MacFunction mac_from_code(uint8_t mf) {
   if(mf == 0) {
      return MacFunction::HmacSha256;
   }
   if(mf == 1) {
      return MacFunction::CmacAes;
   }
   throw Error(ErrorCode::ReservedCode, "MF code " + std::to_string(mf) + " is reserved");
}

MacltEntry lookup_maclt(uint8_t maclt) {
   if(maclt == 1) {
      return {{0, 4}, 1};
   }
   if(maclt == 2) {
      return {{12}, 10};
   }
   throw Error(ErrorCode::ReservedCode, "MACLT " + std::to_string(maclt) + " is not modelled");
}

uint8_t maclt_for_delay(uint32_t delay) {
   if(delay == 1) {
      return 1;
   }
   if(delay == 10) {
      return 2;
   }
   throw Error(ErrorCode::InvalidParams, "disclosure delay must be 1 or 10 subframes");
}

// ---------------------------------------------------------------- NMA header

std::string_view to_string(Cpks c) {
   switch(c) {
      case Cpks::Nominal:
         return "Nominal";
      case Cpks::EndOfChain:
         return "EOC";
      case Cpks::ChainRevoked:
         return "CREV";
      case Cpks::NewPublicKey:
         return "NPK";
      case Cpks::PublicKeyRevoked:
         return "PKREV";
      case Cpks::NewMerkleTree:
         return "NMT";
   }
   return "?";
}

uint8_t NmaHeader::encode() const {
   if(cid > 3) {
      throw Error(ErrorCode::Overflow, "CID is a 2-bit field");
   }
   return static_cast<uint8_t>((static_cast<unsigned>(status) << 6) | (cid << 4) | (static_cast<unsigned>(cpks) << 1));
}

NmaHeader NmaHeader::decode(uint8_t byte) {
   if((byte & 1) != 0) {
      throw Error(ErrorCode::MalformedDsm, "NMA header reserved bit set");
   }
   const uint8_t cpks = (byte >> 1) & 0x07;
   if(cpks == 0 || cpks == 7) {
      throw Error(ErrorCode::ReservedCode, "CPKS " + std::to_string(cpks) + " is reserved");
   }
   NmaHeader h;
   h.status = static_cast<NmaStatus>(byte >> 6);
   h.cid = (byte >> 4) & 0x03;
   h.cpks = static_cast<Cpks>(cpks);
   return h;
}

std::string_view to_string(LifecycleEvent e) {
   switch(e) {
      case LifecycleEvent::Nominal:
         return "Nominal";
      case LifecycleEvent::ChainRenewal:
         return "ChainRenewal";
      case LifecycleEvent::ChainRevocation:
         return "ChainRevocation";
      case LifecycleEvent::NewPublicKey:
         return "NewPublicKey";
      case LifecycleEvent::PublicKeyRevocation:
         return "PublicKeyRevocation";
      case LifecycleEvent::NewMerkleTree:
         return "NewMerkleTree";
   }
   return "?";
}

NmaHeader cpks_transition(const NmaHeader& current, LifecycleEvent event) {
   NmaHeader next = current;
   const Cpks c = current.cpks;
   auto from = [c](std::initializer_list<Cpks> allowed) {
      for(Cpks a : allowed) {
         if(a == c) {
            return true;
         }
      }
      return false;
   };
   bool ok = false;
   switch(event) {
      case LifecycleEvent::Nominal:
         ok = true;
         next.cpks = Cpks::Nominal;
         break;
      case LifecycleEvent::ChainRenewal:
         ok = from({Cpks::Nominal, Cpks::NewPublicKey});
         next.cpks = Cpks::EndOfChain;
         next.cid = (current.cid + 1) % 4;
         break;
      case LifecycleEvent::ChainRevocation:
         ok = from({Cpks::Nominal, Cpks::EndOfChain, Cpks::NewPublicKey});
         next.cpks = Cpks::ChainRevoked;
         next.cid = (current.cid + 1) % 4;
         break;
      case LifecycleEvent::NewPublicKey:
         ok = from({Cpks::Nominal, Cpks::EndOfChain});
         next.cpks = Cpks::NewPublicKey;
         break;
      case LifecycleEvent::PublicKeyRevocation:
         ok = from({Cpks::Nominal, Cpks::EndOfChain, Cpks::ChainRevoked, Cpks::NewPublicKey});
         next.cpks = Cpks::PublicKeyRevoked;
         break;
      case LifecycleEvent::NewMerkleTree:
         ok = from({Cpks::Nominal, Cpks::PublicKeyRevoked});
         next.cpks = Cpks::NewMerkleTree;
         break;
   }
   if(!ok) {
      throw Error(ErrorCode::InvalidTransition,
                  std::string(to_string(event)) + " is not defined from " + std::string(to_string(c)));
   }
   return next;
}

// ---------------------------------------------------------------- HKROOT

BitString serialize_hkroot(const HkrootMessage& msg, BidMode mode) {
   const unsigned bid_bits = mode == BidMode::Nominal ? kNominalBidBits : kExtendedBidBits;
   if(msg.block.size() != block_payload_bits(mode)) {
      throw Error(ErrorCode::BadLength, "DSM block has the wrong size for the BID mode");
   }
   bitgrid::BitWriter w;
   w.write(msg.header.encode(), 8);
   w.write(msg.dsm_id, 4);
   w.write(msg.bid, bid_bits);
   w.write(msg.block);
   return w.take();
}

HkrootMessage parse_hkroot(const BitString& bits, BidMode mode) {
   if(bits.size() != bitgrid::kHkrootBits) {
      throw Error(ErrorCode::BadLength, "HKROOT must be 120 bits");
   }
   const unsigned bid_bits = mode == BidMode::Nominal ? kNominalBidBits : kExtendedBidBits;
   bitgrid::BitReader r(bits);
   HkrootMessage msg;
   msg.header = NmaHeader::decode(static_cast<uint8_t>(r.read(8)));
   msg.dsm_id = static_cast<uint8_t>(r.read(4));
   msg.bid = static_cast<uint16_t>(r.read(bid_bits));
   msg.block = r.read_bits(block_payload_bits(mode));
   return msg;
}

// ---------------------------------------------------------------- segmentation

std::vector<BitString> segment(const BitString& payload, BidMode mode) {
   const unsigned bs = block_payload_bits(mode);
   if(mode == BidMode::Nominal && payload.size() % bs != 0) {
      throw Error(ErrorCode::BadLength, "nominal DSM length must be a multiple of 104 bits");
   }
   if(payload.empty()) {
      throw Error(ErrorCode::BadLength, "empty DSM");
   }
   const auto blocks = blocks_for(payload.size(), mode);
   if(!blocks) {
      throw Error(ErrorCode::CapacityExceeded,
                  std::to_string(payload.size()) + " bits need more than " + std::to_string(max_blocks(mode)) +
                     " blocks");
   }
   std::vector<BitString> out;
   out.reserve(*blocks);
   for(unsigned i = 0; i < *blocks; ++i) {
      const size_t pos = size_t{i} * bs;
      const size_t len = std::min<size_t>(bs, payload.size() - pos);
      BitString b = payload.slice(pos, len);
      if(len < bs) {
         b.append(BitString(bs - len));
      }
      out.push_back(std::move(b));
   }
   return out;
}

std::optional<unsigned> DsmBlockStream::expected_blocks() const {
   const auto it = m_blocks.find(0);
   if(it == m_blocks.end()) {
      return std::nullopt;
   }
   return static_cast<unsigned>(it->second.read_uint(0, 7)) + 1;
}

AccumulateResult DsmBlockStream::accumulate(uint8_t dsm_id, uint16_t bid, const BitString& block) {
   if(dsm_id != m_dsm_id || block.size() != block_payload_bits(m_mode) || bid >= max_blocks(m_mode)) {
      return {AccumulateStatus::Conflict, {}};
   }
   if(bid == 0 && static_cast<unsigned>(block.read_uint(0, 7)) + 1 > max_blocks(m_mode)) {
      return {AccumulateStatus::Conflict, {}};
   }
   const auto [it, inserted] = m_blocks.emplace(bid, block);
   if(!inserted && it->second != block) {
      return {AccumulateStatus::Conflict, {}};
   }
   const auto expected = expected_blocks();
   if(!expected) {
      return {AccumulateStatus::Incomplete, {}};
   }
   // A block id at or past NB contradicts the announced length.
   if(m_blocks.rbegin()->first >= *expected) {
      return {AccumulateStatus::Conflict, {}};
   }
   if(m_blocks.size() < *expected) {
      return {AccumulateStatus::Incomplete, {}};
   }
   AccumulateResult res;
   res.status = AccumulateStatus::Complete;
   for(const auto& [id, b] : m_blocks) {
      res.payload.append(b);
   }
   return res;
}

// ---------------------------------------------------------------- DSM-KROOT

Bytes kroot_signed_message(const NmaHeader& header, const DsmKroot& k) {
   bitgrid::BitWriter w;
   w.write(header.encode(), 8);
   w.write(k.cidkr, 2);
   w.write(k.hf, 2);
   w.write(k.mf, 2);
   w.write(k.ks, 4);
   w.write(k.ts, 4);
   w.write(k.maclt, 8);
   w.write(k.wn, 12);
   w.write(k.towh, 8);
   w.write(k.alpha, 48);
   w.write(k.kroot);
   w.align_to_byte();
   return w.bits().bytes();
}

DsmKroot build_dsm_kroot(const tesla::TeslaChain& chain,
                         const sig::SignatureScheme& signer,
                         std::span<const uint8_t> private_key,
                         const KrootFields& fields,
                         BidMode mode,
                         const CodeTables& codes) {
   const auto& p = chain.params();
   if(p.start_time.tow % 3600 != 0) {
      throw Error(ErrorCode::InvalidParams, "chain start must fall on a whole GST hour");
   }
   if(fields.pkid > 15 || fields.alpha >> 48 != 0) {
      throw Error(ErrorCode::Overflow, "PKID or alpha out of range");
   }
   lookup_maclt(fields.maclt);
   const uint64_t l_dk = kroot_length(p.key_bits, signer.sig_bits());
   DsmKroot k;
   k.nb = nb_for(l_dk, mode, ErrorCode::SignatureTooLarge, "DSM-KROOT");
   k.pkid = fields.pkid;
   k.cidkr = p.chain_id;
   k.hf = hf_code(p.hash);
   k.mf = mf_code(p.mac);
   k.ks = codes.ks_code(p.key_bits);
   k.ts = codes.ts_code(p.tag_bits);
   k.maclt = fields.maclt;
   k.wn = static_cast<uint16_t>(p.start_time.week);
   k.towh = static_cast<uint8_t>(p.start_time.tow / 3600);
   k.alpha = fields.alpha;
   k.kroot = chain.root_key();
   k.ds = signer.sign(private_key, kroot_signed_message(fields.header, k));
   return k;
}

BitString serialize_dsm_kroot(const DsmKroot& k, const CodeTables& codes) {
   const unsigned l_k = codes.key_bits(k.ks);
   if(k.kroot.size() != l_k) {
      throw Error(ErrorCode::BadLength, "KROOT size disagrees with KS");
   }
   const uint64_t l_ds = k.ds.size() * 8;
   const uint64_t l_dk = kroot_length(l_k, l_ds);
   bitgrid::BitWriter w;
   w.write(k.nb, 7);
   w.write(k.pkid, 4);
   w.write(k.cidkr, 2);
   w.write(k.hf, 2);
   w.write(k.mf, 2);
   w.write(k.ks, 4);
   w.write(k.ts, 4);
   w.write(k.maclt, 8);
   w.write(k.wn, 12);
   w.write(k.towh, 8);
   w.write(k.alpha, 48);
   w.write(0, 3);
   w.write(k.kroot);
   w.write_bytes(k.ds);
   w.write_zeros(l_dk - w.size());
   return w.take();
}

DsmKroot parse_dsm_kroot(const BitString& bits, uint64_t ds_bits, const CodeTables& codes) {
   if(bits.size() < kKrootPreambleBits) {
      throw Error(ErrorCode::BadLength, "DSM-KROOT shorter than its preamble");
   }
   bitgrid::BitReader r(bits);
   DsmKroot k;
   k.nb = static_cast<uint8_t>(r.read(7));
   k.pkid = static_cast<uint8_t>(r.read(4));
   k.cidkr = static_cast<uint8_t>(r.read(2));
   k.hf = static_cast<uint8_t>(r.read(2));
   k.mf = static_cast<uint8_t>(r.read(2));
   k.ks = static_cast<uint8_t>(r.read(4));
   k.ts = static_cast<uint8_t>(r.read(4));
   k.maclt = static_cast<uint8_t>(r.read(8));
   k.wn = static_cast<uint16_t>(r.read(12));
   k.towh = static_cast<uint8_t>(r.read(8));
   k.alpha = r.read(48);
   if(r.read(3) != 0) {
      throw Error(ErrorCode::MalformedPadding, "DSM-KROOT reserved bits set");
   }
   hash_from_code(k.hf);
   mac_from_code(k.mf);
   codes.tag_bits(k.ts);
   const unsigned l_k = codes.key_bits(k.ks);
   if(ds_bits % 8 != 0) {
      throw Error(ErrorCode::BadLength, "signature length must be whole bytes");
   }
   const uint64_t l_dk = kroot_length(l_k, ds_bits);
   const BitString body = trim_fill(bits, l_dk, "DSM-KROOT");
   bitgrid::BitReader br(body);
   br.read_bits(kKrootPreambleBits);
   k.kroot = br.read_bits(l_k);
   k.ds = br.read_bits(ds_bits).bytes();
   if(!br.read_bits(br.remaining()).all_zero()) {
      throw Error(ErrorCode::MalformedPadding, "non-zero DSM-KROOT padding");
   }
   return k;
}

bool verify_dsm_kroot(const DsmKroot& k,
                      const NmaHeader& header,
                      const sig::SignatureScheme& scheme,
                      std::span<const uint8_t> public_key) {
   if(k.ds.size() * 8 != scheme.sig_bits()) {
      return false;
   }
   return scheme.verify(public_key, kroot_signed_message(header, k), k.ds);
}

tesla::TeslaParams params_from_kroot(const DsmKroot& k, const CodeTables& codes, bool scaled) {
   tesla::TeslaParams p;
   p.key_bits = codes.key_bits(k.ks);
   p.tag_bits = codes.tag_bits(k.ts);
   p.hash = hash_from_code(k.hf);
   p.mac = mac_from_code(k.mf);
   p.chain_id = k.cidkr;
   p.chain_length = UINT32_MAX;
   p.start_time = bitgrid::GstTime{k.wn, uint32_t{k.towh} * 3600};
   p.scaled = scaled;
   return p;
}

// ---------------------------------------------------------------- Merkle tree

Hash256 leaf_hash(uint8_t npkt, uint8_t npkid, std::span<const uint8_t> npk) {
   Bytes in;
   in.reserve(npk.size() + 1);
   in.push_back(static_cast<uint8_t>(((npkt & 0x0F) << 4) | (npkid & 0x0F)));
   in.insert(in.end(), npk.begin(), npk.end());
   const Bytes h = crypto::sha256(in);
   Hash256 out;
   std::copy(h.begin(), h.end(), out.begin());
   return out;
}

Hash256 node_hash(const Hash256& left, const Hash256& right) {
   Bytes in(left.begin(), left.end());
   in.insert(in.end(), right.begin(), right.end());
   const Bytes h = crypto::sha256(in);
   Hash256 out;
   std::copy(h.begin(), h.end(), out.begin());
   return out;
}

MerkleTree MerkleTree::build(std::span<const MerkleLeaf> leaves) {
   if(leaves.size() != kMerkleLeaves) {
      throw Error(ErrorCode::InvalidParams, "Merkle tree needs exactly 16 leaves");
   }
   MerkleTree t;
   t.m_leaves.assign(leaves.begin(), leaves.end());
   t.m_nodes.resize(2 * kMerkleLeaves);
   for(unsigned i = 0; i < kMerkleLeaves; ++i) {
      t.m_nodes[kMerkleLeaves + i] = leaf_hash(leaves[i].npkt, static_cast<uint8_t>(i), leaves[i].npk);
   }
   for(unsigned i = kMerkleLeaves - 1; i >= 1; --i) {
      t.m_nodes[i] = node_hash(t.m_nodes[2 * i], t.m_nodes[2 * i + 1]);
   }
   return t;
}

MerklePath MerkleTree::path(uint8_t npkid) const {
   if(npkid >= kMerkleLeaves) {
      throw Error(ErrorCode::InvalidParams, "NPKID is a 4-bit field");
   }
   MerklePath p;
   unsigned pos = kMerkleLeaves + npkid;
   for(unsigned level = 0; level < kMerkleDepth; ++level) {
      p[level] = m_nodes[pos ^ 1];
      pos >>= 1;
   }
   return p;
}

bool verify_merkle_path(const Hash256& leaf, uint8_t npkid, const MerklePath& path, const Hash256& root) {
   if(npkid >= kMerkleLeaves) {
      return false;
   }
   Hash256 h = leaf;
   unsigned pos = npkid;
   for(unsigned level = 0; level < kMerkleDepth; ++level) {
      h = (pos & 1) ? node_hash(path[level], h) : node_hash(h, path[level]);
      pos >>= 1;
   }
   return crypto::constant_time_equal(h, root);
}

void write_merkle_file(std::ostream& out, const MerkleTree& tree) {
   out << "root=" << bitgrid::to_hex(tree.root()) << "\n";
   for(unsigned i = 0; i < kMerkleLeaves; ++i) {
      const auto& l = tree.leaf(static_cast<uint8_t>(i));
      out << "leaf " << i << " npkt=" << unsigned{l.npkt} << " npk=" << bitgrid::to_hex(l.npk) << "\n";
   }
}

MerkleTree read_merkle_file(std::istream& in) {
   std::string line;
   std::optional<Bytes> root;
   std::vector<std::optional<MerkleLeaf>> leaves(kMerkleLeaves);
   try {
      while(std::getline(in, line)) {
         if(line.empty() || line[0] == '#') {
            continue;
         }
         if(line.rfind("root=", 0) == 0) {
            root = bitgrid::from_hex(line.substr(5));
            continue;
         }
         std::istringstream ls(line);
         std::string word, npkt_tok, npk_tok;
         unsigned id = 0;
         if(!(ls >> word >> id >> npkt_tok >> npk_tok) || word != "leaf" || id >= kMerkleLeaves ||
            npkt_tok.rfind("npkt=", 0) != 0 || npk_tok.rfind("npk=", 0) != 0) {
            throw Error(ErrorCode::ConfigInvalid, "malformed Merkle file line '" + line + "'");
         }
         MerkleLeaf l;
         l.npkt = static_cast<uint8_t>(std::stoul(npkt_tok.substr(5)));
         l.npk = bitgrid::from_hex(npk_tok.substr(4));
         leaves[id] = std::move(l);
      }
   } catch(const Error& e) {
      if(e.code() == ErrorCode::ConfigInvalid) {
         throw;
      }
      throw Error(ErrorCode::ConfigInvalid, std::string("Merkle file: ") + e.what());
   } catch(const std::logic_error&) {
      throw Error(ErrorCode::ConfigInvalid, "Merkle file: bad number");
   }
   std::vector<MerkleLeaf> list;
   for(auto& l : leaves) {
      if(!l) {
         throw Error(ErrorCode::ConfigInvalid, "Merkle file is missing leaves");
      }
      list.push_back(*l);
   }
   MerkleTree t = MerkleTree::build(list);
   if(!root || root->size() != 32 || !std::equal(root->begin(), root->end(), t.root().begin())) {
      throw Error(ErrorCode::ConfigInvalid, "Merkle file root does not match its leaves");
   }
   return t;
}

// ---------------------------------------------------------------- DSM-PKR

DsmPkr build_dsm_pkr(std::span<const uint8_t> npk, uint8_t npkt, uint8_t npkid, const MerkleTree& tree, BidMode mode) {
   if(npkid >= kMerkleLeaves || npkt > 15) {
      throw Error(ErrorCode::InvalidParams, "NPKT and NPKID are 4-bit fields");
   }
   const auto& leaf = tree.leaf(npkid);
   if(leaf.npkt != npkt || !std::equal(leaf.npk.begin(), leaf.npk.end(), npk.begin(), npk.end())) {
      throw Error(ErrorCode::InvalidParams, "key is not the tree leaf at NPKID " + std::to_string(npkid));
   }
   DsmPkr p;
   p.nb = nb_for(pkr_length(npk.size() * 8), mode, ErrorCode::KeyTooLarge, "DSM-PKR");
   p.mid = 0;
   p.npkt = npkt;
   p.npkid = npkid;
   p.path = tree.path(npkid);
   p.npk.assign(npk.begin(), npk.end());
   return p;
}

BitString serialize_dsm_pkr(const DsmPkr& p) {
   const uint64_t l_dp = pkr_length(p.npk.size() * 8);
   bitgrid::BitWriter w;
   w.write(p.nb, 7);
   w.write(p.mid, 1);
   w.write(p.npkt, 4);
   w.write(p.npkid, 4);
   for(const auto& node : p.path) {
      w.write_bytes(node);
   }
   w.write_bytes(p.npk);
   w.write_zeros(l_dp - w.size());
   return w.take();
}

DsmPkr parse_dsm_pkr(const BitString& bits, uint64_t npk_bits) {
   if(npk_bits % 8 != 0) {
      throw Error(ErrorCode::BadLength, "public key length must be whole bytes");
   }
   const BitString body = trim_fill(bits, pkr_length(npk_bits), "DSM-PKR");
   bitgrid::BitReader r(body);
   DsmPkr p;
   p.nb = static_cast<uint8_t>(r.read(7));
   p.mid = static_cast<uint8_t>(r.read(1));
   p.npkt = static_cast<uint8_t>(r.read(4));
   p.npkid = static_cast<uint8_t>(r.read(4));
   for(auto& node : p.path) {
      const Bytes b = r.read_bytes(32);
      std::copy(b.begin(), b.end(), node.begin());
   }
   p.npk = r.read_bits(npk_bits).bytes();
   if(!r.read_bits(r.remaining()).all_zero()) {
      throw Error(ErrorCode::MalformedPadding, "non-zero DSM-PKR padding");
   }
   return p;
}

DsmPkr parse_dsm_pkr(const BitString& bits, const sig::NpktRegistry& registry) {
   if(bits.size() < kPkrMetadataBits) {
      throw Error(ErrorCode::BadLength, "DSM-PKR shorter than its metadata");
   }
   const auto npkt = static_cast<uint8_t>(bits.read_uint(8, 4));
   return parse_dsm_pkr(bits, registry.lookup(npkt)->pk_bits());
}

bool verify_pkr(const DsmPkr& pkr, const Hash256& trusted_root) {
   return verify_merkle_path(leaf_hash(pkr.npkt, pkr.npkid, pkr.npk), pkr.npkid, pkr.path, trusted_root);
}

}  // namespace osnma::dsm
