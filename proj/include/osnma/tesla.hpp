#pragma once

#include <osnma/bitgrid.hpp>
#include <osnma/crypto.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace osnma::tesla {

using bitgrid::BitString;
using bitgrid::GstTime;

inline constexpr unsigned kMinKeyBits = 96;
inline constexpr unsigned kMaxKeyBits = 256;
inline constexpr unsigned kMinTagBits = 20;
inline constexpr unsigned kMaxTagBits = 40;
inline constexpr unsigned kMinTags = 4;
inline constexpr unsigned kMaxTags = 10;
inline constexpr unsigned kTagInfoBits = 16;
inline constexpr unsigned kMacseqBits = 12;

/// n_t = floor((480 - l_K) / (l_T + 16)).
unsigned tags_per_mack(unsigned key_bits, unsigned tag_bits);

struct TeslaParams {
      unsigned key_bits = 128;
      unsigned tag_bits = 40;
      HashFunction hash = HashFunction::Sha256;
      MacFunction mac = MacFunction::HmacSha256;
      uint8_t chain_id = 0;
      uint32_t chain_length = 1;
      /// GST of the first subframe served by the chain (K_1 is used there).
      GstTime start_time{};
      /// Desk-scale experiments: allows tag lengths below 20 bits and tag
      /// counts outside [4, 10]. Never set for on-air parameter sets.
      bool scaled = false;

      /// Throws InvalidParams.
      void validate() const;
      unsigned tags_per_mack() const { return tesla::tags_per_mack(key_bits, tag_bits); }
      /// GST at which K_index is applied.
      GstTime key_time(uint32_t index) const;

      friend bool operator==(const TeslaParams&, const TeslaParams&) = default;
};

/// A chain key together with its position. Index 0 is the root key.
struct TeslaKey {
      uint32_t index = 0;
      BitString bits;

      friend bool operator==(const TeslaKey&, const TeslaKey&) = default;
};

/// One-way step K_{index-1} = trunc_lK(H(K_index || CID || GST(index))).
BitString derive(const TeslaParams& params, const BitString& key, uint32_t index);

/// Applies derive() from `from_index` down to `to_index`.
BitString derive_down(const TeslaParams& params, BitString key, uint32_t from_index, uint32_t to_index);

class TeslaChain {
   public:
      /// Throws BadSeedLength, InvalidParams or UnsupportedHash.
      static TeslaChain generate(const TeslaParams& params, const BitString& seed);

      const TeslaParams& params() const { return m_params; }
      uint32_t length() const { return m_params.chain_length; }
      const BitString& root_key() const { return m_keys.front(); }
      const BitString& seed_key() const { return m_keys.back(); }

      /// K_index for 0 <= index <= N. Throws ChainExhausted otherwise.
      const BitString& key(uint32_t index) const;
      TeslaKey key_at(uint32_t index) const { return {index, key(index)}; }

      /// Re-derives every link.
      bool check() const;

   private:
      TeslaParams m_params;
      std::vector<BitString> m_keys;  // m_keys[i] = K_i
};

/// True iff F^(i-j)(candidate) equals the trusted key. Throws IndexOrder if i <= j.
bool verify_key(const TeslaParams& params, const BitString& candidate, uint32_t i, const TeslaKey& trusted);

enum class Adkd : uint8_t {
   Ephemeris = 0,
   Timing = 4,
   SlowMac = 12,
};

bool is_known_adkd(uint8_t code);
/// 1 for the ephemeris and timing strategies, 10 for the slow MAC.
uint32_t adkd_delay(uint8_t code);

struct TagInfo {
      uint8_t prn = 0;
      uint8_t adkd = 0;  // 4 bits
      uint8_t cop = 0;   // 4 bits

      uint16_t packed() const;
      static TagInfo unpack(uint16_t v);

      friend bool operator==(const TagInfo&, const TagInfo&) = default;
};

struct Tag {
      uint64_t bits = 0;
      TagInfo info;

      friend bool operator==(const Tag&, const Tag&) = default;
};

/// Most significant l_T bits of MAC(key, tag_info || data).
/// Throws RootKeySigning for index 0 and BadLength for a wrong key size.
Tag make_tag(const TeslaParams& params, const TeslaKey& key, std::span<const uint8_t> data, TagInfo info);

/// MSB l_T bits of an arbitrary MAC output.
uint64_t truncate_tag(std::span<const uint8_t> mac, unsigned tag_bits);

struct MackMessage {
      uint64_t tag0 = 0;
      uint16_t macseq = 0;
      std::vector<Tag> tags;  // n_t - 1 entries after the header tag
      BitString key;

      friend bool operator==(const MackMessage&, const MackMessage&) = default;
};

/// 12-bit sequence check over the tag-info list, keyed with the tag key.
uint16_t compute_macseq(const TeslaParams& params,
                        const BitString& key,
                        GstTime gst,
                        uint8_t prn,
                        std::span<const Tag> tags);

/// 480-bit layout: tag0, MACSEQ, 4 reserved, (tag, info) * (n_t - 1), key, zero padding.
BitString serialize_mack(const MackMessage& msg, const TeslaParams& params);
/// Throws BadLength or MalformedPadding.
MackMessage parse_mack(const BitString& bits, const TeslaParams& params);

/**
 * Builds the MACK for the subframe whose tags use K_index and which discloses
 * K_{index - delay}. tags must hold exactly n_t - 1 entries.
 * Throws ChainExhausted, TooManyTags, TooFewTags or InvalidParams.
 */
MackMessage build_mack(const TeslaChain& chain,
                       uint32_t index,
                       uint64_t tag0,
                       std::span<const Tag> tags,
                       uint32_t delay,
                       uint8_t prn);

enum class Verdict : uint8_t {
   Authentic,
   Forged,
   KeyUnverified,
};

std::string_view to_string(Verdict v);

struct PendingTag {
      Tag tag;
      Bytes data;
      uint32_t key_index = 0;
};

/// Verdicts for tags whose key has just been disclosed. The key is first
/// checked against the anchor; on failure every verdict is KeyUnverified.
std::vector<Verdict> verify_tags(const TeslaParams& params,
                                 std::span<const PendingTag> pending,
                                 const TeslaKey& disclosed,
                                 const TeslaKey& anchor);

struct ChainDump {
      TeslaParams params;
      std::vector<BitString> keys;  // keys[0] is the root
};

/// Header line then one hex key per line, root first.
void write_chain_dump(std::ostream& out, const TeslaChain& chain);
/// Throws InvalidParams or BadHex on malformed input.
ChainDump read_chain_dump(std::istream& in);
/// Index of the first broken link, or -1 when every link verifies.
long verify_chain_dump(const ChainDump& dump);

}  // namespace osnma::tesla
