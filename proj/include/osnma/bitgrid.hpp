#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osnma::bitgrid {

inline constexpr unsigned kPageFieldBits = 40;
inline constexpr unsigned kPagesPerSubframe = 15;
inline constexpr unsigned kHkrootBits = 120;
inline constexpr unsigned kMackBits = 480;
inline constexpr unsigned kHkrootBitsPerPage = kHkrootBits / kPagesPerSubframe;  // 8
inline constexpr unsigned kMackBitsPerPage = kMackBits / kPagesPerSubframe;      // 32

inline constexpr uint32_t kSecondsPerWeek = 604800;
inline constexpr uint32_t kSubframeSeconds = 30;
inline constexpr uint32_t kFrameSeconds = 720;
inline constexpr uint32_t kPageSeconds = 2;

/**
 * Growable bit string, most significant bit first.
 *
 * Bit 0 is the MSB of byte 0. Unused trailing bits of the last byte are
 * always kept zero so that byte-wise equality and hashing are well defined.
 */
class BitString {
   public:
      BitString() = default;
      explicit BitString(size_t nbits) : m_bytes((nbits + 7) / 8, 0), m_size(nbits) {}

      /// Takes the first nbits of data (data must hold at least nbits).
      static BitString from_bytes(std::span<const uint8_t> data, size_t nbits);
      static BitString from_bytes(std::span<const uint8_t> data) { return from_bytes(data, data.size() * 8); }
      /// Hex text, optionally truncated to nbits (default: 4 bits per digit).
      static BitString from_hex(std::string_view hex, size_t nbits);
      static BitString from_hex(std::string_view hex);
      /// Parses a literal such as "0101 1100" (whitespace ignored).
      static BitString from_binary(std::string_view bits);

      size_t size() const { return m_size; }
      bool empty() const { return m_size == 0; }

      bool get(size_t i) const;
      void set(size_t i, bool v);
      void push_back(bool v);
      void append(const BitString& other);
      BitString slice(size_t pos, size_t len) const;

      /// Reads width (<= 64) bits at pos as an unsigned integer.
      uint64_t read_uint(size_t pos, unsigned width) const;

      /// Packed bytes, trailing bits zero.
      const std::vector<uint8_t>& bytes() const { return m_bytes; }
      std::string to_hex() const;
      std::string to_binary() const;

      bool all_zero() const;

      friend bool operator==(const BitString& a, const BitString& b) = default;

   private:
      std::vector<uint8_t> m_bytes;
      size_t m_size = 0;
};

/// Sequential MSB-first writer.
class BitWriter {
   public:
      /// Appends the low `width` bits of value. Throws Overflow if value >= 2^width.
      BitWriter& write(uint64_t value, unsigned width);
      BitWriter& write(const BitString& bits);
      BitWriter& write_bytes(std::span<const uint8_t> data);
      BitWriter& write_zeros(size_t n);
      /// Zero-fills up to the next multiple of 8.
      BitWriter& align_to_byte();

      size_t size() const { return m_bits.size(); }
      const BitString& bits() const { return m_bits; }
      BitString take() { return std::move(m_bits); }

   private:
      BitString m_bits;
};

/// Sequential MSB-first reader. Throws Underrun on reads past the end.
class BitReader {
   public:
      explicit BitReader(const BitString& bits) : m_bits(bits) {}

      uint64_t read(unsigned width);
      BitString read_bits(size_t n);
      std::vector<uint8_t> read_bytes(size_t nbytes);

      size_t position() const { return m_pos; }
      size_t remaining() const { return m_bits.size() - m_pos; }

   private:
      const BitString& m_bits;
      size_t m_pos = 0;
};

/// Galileo System Time: week number and time of week in seconds.
struct GstTime {
      uint32_t week = 0;
      uint32_t tow = 0;

      static GstTime from_total_seconds(uint64_t seconds);
      uint64_t total_seconds() const { return uint64_t{week} * kSecondsPerWeek + tow; }
      GstTime plus_seconds(int64_t delta) const;

      bool on_subframe_boundary() const { return tow % kSubframeSeconds == 0; }
      /// Throws InvalidParams unless tow is a subframe boundary.
      uint32_t subframe_index() const;

      /// 32-bit packing used in MAC and derivation inputs: WN (12 bits) || TOW (20 bits).
      uint32_t packed() const;

      void validate() const;

      friend auto operator<=>(const GstTime&, const GstTime&) = default;
};

/// The 40-bit OSNMA field of one odd I/NAV page.
class OsnmaPageField {
   public:
      OsnmaPageField() = default;
      /// Throws Overflow if value does not fit in 40 bits.
      explicit OsnmaPageField(uint64_t value);

      uint64_t value() const { return m_value; }
      BitString bits() const;

      friend bool operator==(const OsnmaPageField&, const OsnmaPageField&) = default;

   private:
      uint64_t m_value = 0;
};

struct PageSplit {
      uint8_t hkroot = 0;  // first 8 bits
      uint32_t mack = 0;   // remaining 32 bits

      friend bool operator==(const PageSplit&, const PageSplit&) = default;
};

PageSplit split_page_field(OsnmaPageField field);
OsnmaPageField join_page_field(PageSplit parts);

/// One subframe worth of OSNMA data: 120 HKROOT bits and 480 MACK bits.
struct SubframePayload {
      BitString hkroot;
      BitString mack;

      /// Throws BadLength unless the two sections have their fixed sizes.
      void validate() const;

      friend bool operator==(const SubframePayload&, const SubframePayload&) = default;
};

using SubframePages = std::array<OsnmaPageField, kPagesPerSubframe>;

SubframePayload assemble_subframe(std::span<const OsnmaPageField> fields);
SubframePages disassemble_subframe(const SubframePayload& payload);

/// Golden-vector text format: one 10-digit hex page field per line,
/// 15 lines per subframe, blocks separated by blank lines.
std::vector<SubframePages> read_page_vectors(std::istream& in);
void write_page_vectors(std::ostream& out, std::span<const SubframePages> subframes);

std::string to_hex(std::span<const uint8_t> data);
std::vector<uint8_t> from_hex(std::string_view hex);

}  // namespace osnma::bitgrid
