#pragma once

#include <osnma/bitgrid.hpp>
#include <osnma/crypto.hpp>
#include <osnma/sigscheme.hpp>
#include <osnma/tesla.hpp>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace osnma::dsm {

using bitgrid::BitString;

inline constexpr unsigned kBlockBits = 104;
inline constexpr unsigned kExtendedBlockBits = 101;
inline constexpr unsigned kNominalMaxBlocks = 16;
inline constexpr unsigned kExtendedMaxBlocks = 128;
inline constexpr unsigned kNominalBidBits = 4;
inline constexpr unsigned kExtendedBidBits = 7;
inline constexpr unsigned kMerkleNodeBits = 256;
inline constexpr unsigned kMerkleDepth = 4;
inline constexpr unsigned kMerkleLeaves = 16;
inline constexpr unsigned kMerklePathBits = kMerkleDepth * kMerkleNodeBits;  // 1024
inline constexpr unsigned kPkrMetadataBits = 16;
inline constexpr unsigned kKrootPreambleBits = 104;
/// Gross extended capacity, 128 blocks of 104 bits.
inline constexpr unsigned kExtendedGrossBits = kExtendedMaxBlocks * kBlockBits;  // 13312
/// Net extended capacity once the BID takes 3 bits from every block.
inline constexpr unsigned kExtendedNetBits = kExtendedMaxBlocks * kExtendedBlockBits;  // 12928

enum class BidMode : uint8_t {
   Nominal,
   Extended,
};

std::string_view to_string(BidMode m);
unsigned block_payload_bits(BidMode m);
unsigned max_blocks(BidMode m);
/// On-air blocks for a payload, or nullopt past the mode cap.
std::optional<unsigned> blocks_for(size_t payload_bits, BidMode m);

/// l_DK = 104 * ceil(1 + (l_K + l_DS) / 104).
uint64_t kroot_length(uint64_t key_bits, uint64_t ds_bits);
/// l_DP = 104 * ceil((1040 + l_NPK) / 104).
uint64_t pkr_length(uint64_t npk_bits);

// ---------------------------------------------------------------- field codes

/// KS / TS code tables. Built-in codes follow the on-air assignments; the
/// extension maps assign otherwise reserved codes.
struct CodeTables {
      std::map<uint8_t, unsigned> ks_extension;
      std::map<uint8_t, unsigned> ts_extension;

      /// Throws ReservedCode.
      unsigned key_bits(uint8_t ks) const;
      unsigned tag_bits(uint8_t ts) const;
      uint8_t ks_code(unsigned key_bits) const;
      uint8_t ts_code(unsigned tag_bits) const;
};

uint8_t hf_code(HashFunction h);
HashFunction hash_from_code(uint8_t hf);
uint8_t mf_code(MacFunction m);
MacFunction mac_from_code(uint8_t mf);

struct MacltEntry {
      std::vector<uint8_t> adkds;
      uint32_t delay = 1;
};

/// 1: ephemeris + timing with one-subframe delay; 2: slow MAC with ten. Throws ReservedCode.
MacltEntry lookup_maclt(uint8_t maclt);
uint8_t maclt_for_delay(uint32_t delay);

// ---------------------------------------------------------------- NMA header

enum class NmaStatus : uint8_t {
   Reserved = 0,
   Test = 1,
   Operational = 2,
   DontUse = 3,
};

enum class Cpks : uint8_t {
   Nominal = 1,
   EndOfChain = 2,
   ChainRevoked = 3,
   NewPublicKey = 4,
   PublicKeyRevoked = 5,
   NewMerkleTree = 6,
};

std::string_view to_string(Cpks c);

struct NmaHeader {
      NmaStatus status = NmaStatus::Operational;
      uint8_t cid = 0;
      Cpks cpks = Cpks::Nominal;

      uint8_t encode() const;
      /// Throws ReservedCode for CPKS 0/7 and MalformedDsm for a set reserved bit.
      static NmaHeader decode(uint8_t byte);

      friend bool operator==(const NmaHeader&, const NmaHeader&) = default;
};

enum class LifecycleEvent : uint8_t {
   Nominal,
   ChainRenewal,
   ChainRevocation,
   NewPublicKey,
   PublicKeyRevocation,
   NewMerkleTree,
};

std::string_view to_string(LifecycleEvent e);

/// Throws InvalidTransition for pairs outside the table.
NmaHeader cpks_transition(const NmaHeader& current, LifecycleEvent event);

// ---------------------------------------------------------------- HKROOT

struct HkrootMessage {
      NmaHeader header;
      uint8_t dsm_id = 0;
      uint16_t bid = 0;
      BitString block;

      friend bool operator==(const HkrootMessage&, const HkrootMessage&) = default;
};

BitString serialize_hkroot(const HkrootMessage& msg, BidMode mode);
HkrootMessage parse_hkroot(const BitString& bits, BidMode mode);

inline constexpr uint8_t kFirstPkrDsmId = 12;
inline bool is_pkr_dsm_id(uint8_t id) {
   return id >= kFirstPkrDsmId && id <= 15;
}

// ---------------------------------------------------------------- segmentation

/// Splits a payload into on-air blocks. Nominal mode needs a multiple of 104
/// bits; extended mode zero-pads the last 101-bit block.
/// Throws BadLength or CapacityExceeded.
std::vector<BitString> segment(const BitString& payload, BidMode mode);

enum class AccumulateStatus : uint8_t {
   Incomplete,
   Complete,
   Conflict,
};

struct AccumulateResult {
      AccumulateStatus status = AccumulateStatus::Incomplete;
      BitString payload;
};

/// Reassembles one DSM from blocks in any order. The block count is read
/// from the 7-bit NB field at the start of block 0.
class DsmBlockStream {
   public:
      DsmBlockStream(uint8_t dsm_id, BidMode mode) : m_dsm_id(dsm_id), m_mode(mode) {}

      AccumulateResult accumulate(uint8_t dsm_id, uint16_t bid, const BitString& block);
      void reset() { m_blocks.clear(); }

      uint8_t dsm_id() const { return m_dsm_id; }
      size_t received() const { return m_blocks.size(); }
      /// Known once block 0 has arrived.
      std::optional<unsigned> expected_blocks() const;

   private:
      uint8_t m_dsm_id;
      BidMode m_mode;
      std::map<uint16_t, BitString> m_blocks;
};

// ---------------------------------------------------------------- DSM-KROOT

struct DsmKroot {
      uint8_t nb = 0;  // on-air block count minus one
      uint8_t pkid = 0;
      uint8_t cidkr = 0;
      uint8_t hf = 0;
      uint8_t mf = 0;
      uint8_t ks = 0;
      uint8_t ts = 0;
      uint8_t maclt = 1;
      uint16_t wn = 0;
      uint8_t towh = 0;  // chain start, hours into the week
      uint64_t alpha = 0;
      BitString kroot;
      Bytes ds;

      friend bool operator==(const DsmKroot&, const DsmKroot&) = default;
};

struct KrootFields {
      NmaHeader header;
      uint8_t pkid = 0;
      uint8_t maclt = 1;
      uint64_t alpha = 0;
};

/// Bytes covered by the DS: NMA header, CIDKR..TOWH, alpha and KROOT, byte aligned.
Bytes kroot_signed_message(const NmaHeader& header, const DsmKroot& k);

/**
 * Signs the chain root. The chain must start on a whole hour.
 * Throws SignatureTooLarge past the mode capacity, InvalidParams otherwise.
 */
DsmKroot build_dsm_kroot(const tesla::TeslaChain& chain,
                         const sig::SignatureScheme& signer,
                         std::span<const uint8_t> private_key,
                         const KrootFields& fields,
                         BidMode mode,
                         const CodeTables& codes = {});

BitString serialize_dsm_kroot(const DsmKroot& k, const CodeTables& codes = {});
/// ds_bits comes from the scheme behind PKID. Accepts trailing zero fill
/// up to the next extended block. Throws BadLength, MalformedPadding, ReservedCode.
DsmKroot parse_dsm_kroot(const BitString& bits, uint64_t ds_bits, const CodeTables& codes = {});

bool verify_dsm_kroot(const DsmKroot& k,
                      const NmaHeader& header,
                      const sig::SignatureScheme& scheme,
                      std::span<const uint8_t> public_key);

/// Chain parameters announced by a KROOT. chain_length is left at its maximum.
tesla::TeslaParams params_from_kroot(const DsmKroot& k, const CodeTables& codes = {}, bool scaled = false);

// ---------------------------------------------------------------- Merkle tree

using Hash256 = std::array<uint8_t, 32>;
using MerklePath = std::array<Hash256, kMerkleDepth>;

struct MerkleLeaf {
      uint8_t npkt = 0;
      Bytes npk;
};

/// SHA-256(byte(npkt << 4 | npkid) || npk).
Hash256 leaf_hash(uint8_t npkt, uint8_t npkid, std::span<const uint8_t> npk);
Hash256 node_hash(const Hash256& left, const Hash256& right);

class MerkleTree {
   public:
      /// Throws InvalidParams unless exactly 16 leaves are given.
      static MerkleTree build(std::span<const MerkleLeaf> leaves);

      const Hash256& root() const { return m_nodes[1]; }
      const MerkleLeaf& leaf(uint8_t npkid) const { return m_leaves.at(npkid); }
      /// Sibling hashes from the leaf level upwards.
      MerklePath path(uint8_t npkid) const;

   private:
      std::vector<MerkleLeaf> m_leaves;
      std::vector<Hash256> m_nodes;  // heap order, m_nodes[1] is the root
};

bool verify_merkle_path(const Hash256& leaf, uint8_t npkid, const MerklePath& path, const Hash256& root);

/// `root=<hex>` then 16 lines `leaf <id> npkt=<n> npk=<hex>`.
void write_merkle_file(std::ostream& out, const MerkleTree& tree);
/// Throws ConfigInvalid, including when the stated root does not match the leaves.
MerkleTree read_merkle_file(std::istream& in);

// ---------------------------------------------------------------- DSM-PKR

struct DsmPkr {
      uint8_t nb = 0;
      uint8_t mid = 0;  // 1 bit
      uint8_t npkt = 0;
      uint8_t npkid = 0;
      MerklePath path{};
      Bytes npk;

      friend bool operator==(const DsmPkr&, const DsmPkr&) = default;
};

/// Throws InvalidParams when the key does not sit at npkid in the tree,
/// KeyTooLarge past the mode capacity.
DsmPkr build_dsm_pkr(std::span<const uint8_t> npk, uint8_t npkt, uint8_t npkid, const MerkleTree& tree, BidMode mode);

BitString serialize_dsm_pkr(const DsmPkr& p);
/// npk_bits comes from the NPKT registry. Throws BadLength or MalformedPadding.
DsmPkr parse_dsm_pkr(const BitString& bits, uint64_t npk_bits);
/// Reads NPKT from the metadata and sizes the key through the registry.
/// Throws UnassignedNpkt for codes without a provider.
DsmPkr parse_dsm_pkr(const BitString& bits, const sig::NpktRegistry& registry);

bool verify_pkr(const DsmPkr& pkr, const Hash256& trusted_root);

}  // namespace osnma::dsm
