#include <osnma/bitgrid.hpp>

#include <osnma/error.hpp>

#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

namespace osnma::bitgrid {

namespace {

int hex_digit(char c) {
   if(c >= '0' && c <= '9') {
      return c - '0';
   }
   if(c >= 'a' && c <= 'f') {
      return c - 'a' + 10;
   }
   if(c >= 'A' && c <= 'F') {
      return c - 'A' + 10;
   }
   return -1;
}

constexpr uint64_t low_mask(unsigned width) {
   return width >= 64 ? ~uint64_t{0} : ((uint64_t{1} << width) - 1);
}

}  // namespace

std::string to_hex(std::span<const uint8_t> data) {
   static constexpr char digits[] = "0123456789abcdef";
   std::string out;
   out.reserve(data.size() * 2);
   for(uint8_t b : data) {
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 0x0F]);
   }
   return out;
}

std::vector<uint8_t> from_hex(std::string_view hex) {
   if(hex.size() % 2 != 0) {
      throw Error(ErrorCode::BadHex, "odd number of hex digits");
   }
   std::vector<uint8_t> out(hex.size() / 2);
   for(size_t i = 0; i < out.size(); ++i) {
      const int hi = hex_digit(hex[2 * i]);
      const int lo = hex_digit(hex[2 * i + 1]);
      if(hi < 0 || lo < 0) {
         throw Error(ErrorCode::BadHex, std::string("invalid hex text '") + std::string(hex) + "'");
      }
      out[i] = static_cast<uint8_t>((hi << 4) | lo);
   }
   return out;
}

// ---------------------------------------------------------------- BitString

BitString BitString::from_bytes(std::span<const uint8_t> data, size_t nbits) {
   if(nbits > data.size() * 8) {
      throw Error(ErrorCode::Underrun, "byte buffer shorter than requested bit count");
   }
   BitString out(nbits);
   std::copy(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(out.m_bytes.size()), out.m_bytes.begin());
   if(nbits % 8 != 0) {
      out.m_bytes.back() &= static_cast<uint8_t>(0xFF << (8 - nbits % 8));
   }
   return out;
}

BitString BitString::from_hex(std::string_view hex, size_t nbits) {
   BitString out;
   for(char c : hex) {
      if(std::isspace(static_cast<unsigned char>(c))) {
         continue;
      }
      const int d = hex_digit(c);
      if(d < 0) {
         throw Error(ErrorCode::BadHex, std::string("invalid hex digit '") + c + "'");
      }
      for(int b = 3; b >= 0; --b) {
         out.push_back(((d >> b) & 1) != 0);
      }
   }
   if(nbits > out.size()) {
      throw Error(ErrorCode::Underrun, "hex text shorter than requested bit count");
   }
   if(nbits < out.size()) {
      // only the zero-padding digit tail may be dropped
      if(!out.slice(nbits, out.size() - nbits).all_zero()) {
         throw Error(ErrorCode::BadHex, "hex text carries non-zero bits past the declared length");
      }
      out = out.slice(0, nbits);
   }
   return out;
}

BitString BitString::from_hex(std::string_view hex) {
   size_t digits = 0;
   for(char c : hex) {
      if(!std::isspace(static_cast<unsigned char>(c))) {
         ++digits;
      }
   }
   return from_hex(hex, digits * 4);
}

BitString BitString::from_binary(std::string_view bits) {
   BitString out;
   for(char c : bits) {
      if(c == '0' || c == '1') {
         out.push_back(c == '1');
      } else if(!std::isspace(static_cast<unsigned char>(c))) {
         throw Error(ErrorCode::BadHex, std::string("invalid binary digit '") + c + "'");
      }
   }
   return out;
}

bool BitString::get(size_t i) const {
   if(i >= m_size) {
      throw Error(ErrorCode::Underrun, "bit index out of range");
   }
   return ((m_bytes[i / 8] >> (7 - i % 8)) & 1) != 0;
}

void BitString::set(size_t i, bool v) {
   if(i >= m_size) {
      throw Error(ErrorCode::Underrun, "bit index out of range");
   }
   const uint8_t mask = static_cast<uint8_t>(0x80 >> (i % 8));
   if(v) {
      m_bytes[i / 8] |= mask;
   } else {
      m_bytes[i / 8] &= static_cast<uint8_t>(~mask);
   }
}

void BitString::push_back(bool v) {
   if(m_size % 8 == 0) {
      m_bytes.push_back(0);
   }
   ++m_size;
   set(m_size - 1, v);
}

void BitString::append(const BitString& other) {
   if(m_size % 8 == 0) {
      m_bytes.insert(m_bytes.end(), other.m_bytes.begin(), other.m_bytes.end());
      m_size += other.m_size;
      return;
   }
   for(size_t i = 0; i < other.m_size; ++i) {
      push_back(other.get(i));
   }
}

BitString BitString::slice(size_t pos, size_t len) const {
   if(pos + len > m_size) {
      throw Error(ErrorCode::Underrun, "slice past end of bit string");
   }
   if(pos % 8 == 0) {
      return from_bytes(std::span(m_bytes).subspan(pos / 8), len);
   }
   BitString out(len);
   for(size_t i = 0; i < len; ++i) {
      out.set(i, get(pos + i));
   }
   return out;
}

uint64_t BitString::read_uint(size_t pos, unsigned width) const {
   if(width == 0 || width > 64) {
      throw Error(ErrorCode::Overflow, "read width must be in 1..64");
   }
   if(pos + width > m_size) {
      throw Error(ErrorCode::Underrun, "read past end of bit string");
   }
   uint64_t v = 0;
   for(unsigned i = 0; i < width; ++i) {
      v = (v << 1) | static_cast<uint64_t>(get(pos + i));
   }
   return v;
}

std::string BitString::to_hex() const {
   return bitgrid::to_hex(m_bytes);
}

std::string BitString::to_binary() const {
   std::string out;
   out.reserve(m_size);
   for(size_t i = 0; i < m_size; ++i) {
      out.push_back(get(i) ? '1' : '0');
   }
   return out;
}

bool BitString::all_zero() const {
   for(uint8_t b : m_bytes) {
      if(b != 0) {
         return false;
      }
   }
   return true;
}

// ---------------------------------------------------------------- BitWriter

BitWriter& BitWriter::write(uint64_t value, unsigned width) {
   if(width == 0 || width > 64) {
      throw Error(ErrorCode::Overflow, "write width must be in 1..64");
   }
   if((value & ~low_mask(width)) != 0) {
      throw Error(ErrorCode::Overflow,
                  "value " + std::to_string(value) + " does not fit in " + std::to_string(width) + " bits");
   }
   for(int i = static_cast<int>(width) - 1; i >= 0; --i) {
      m_bits.push_back(((value >> i) & 1) != 0);
   }
   return *this;
}

BitWriter& BitWriter::write(const BitString& bits) {
   m_bits.append(bits);
   return *this;
}

BitWriter& BitWriter::write_bytes(std::span<const uint8_t> data) {
   m_bits.append(BitString::from_bytes(data));
   return *this;
}

BitWriter& BitWriter::write_zeros(size_t n) {
   m_bits.append(BitString(n));
   return *this;
}

BitWriter& BitWriter::align_to_byte() {
   if(m_bits.size() % 8 != 0) {
      write_zeros(8 - m_bits.size() % 8);
   }
   return *this;
}

// ---------------------------------------------------------------- BitReader

uint64_t BitReader::read(unsigned width) {
   if(width > remaining()) {
      throw Error(ErrorCode::Underrun,
                  "read of " + std::to_string(width) + " bits with " + std::to_string(remaining()) + " left");
   }
   const uint64_t v = m_bits.read_uint(m_pos, width);
   m_pos += width;
   return v;
}

BitString BitReader::read_bits(size_t n) {
   if(n > remaining()) {
      throw Error(ErrorCode::Underrun,
                  "read of " + std::to_string(n) + " bits with " + std::to_string(remaining()) + " left");
   }
   BitString out = m_bits.slice(m_pos, n);
   m_pos += n;
   return out;
}

std::vector<uint8_t> BitReader::read_bytes(size_t nbytes) {
   return read_bits(nbytes * 8).bytes();
}

// ---------------------------------------------------------------- GstTime

GstTime GstTime::from_total_seconds(uint64_t seconds) {
   GstTime t;
   t.week = static_cast<uint32_t>(seconds / kSecondsPerWeek);
   t.tow = static_cast<uint32_t>(seconds % kSecondsPerWeek);
   return t;
}

GstTime GstTime::plus_seconds(int64_t delta) const {
   const int64_t total = static_cast<int64_t>(total_seconds()) + delta;
   if(total < 0) {
      throw Error(ErrorCode::InvalidParams, "GST before week 0");
   }
   return from_total_seconds(static_cast<uint64_t>(total));
}

uint32_t GstTime::subframe_index() const {
   if(!on_subframe_boundary()) {
      throw Error(ErrorCode::InvalidParams, "TOW " + std::to_string(tow) + " is not a subframe boundary");
   }
   return tow / kSubframeSeconds;
}

uint32_t GstTime::packed() const {
   return ((week & 0xFFF) << 20) | (tow & 0xFFFFF);
}

void GstTime::validate() const {
   if(tow >= kSecondsPerWeek) {
      throw Error(ErrorCode::InvalidParams, "TOW must be below 604800");
   }
   if(week >= 4096) {
      throw Error(ErrorCode::InvalidParams, "week number must fit in 12 bits");
   }
}

// ---------------------------------------------------------------- pages

OsnmaPageField::OsnmaPageField(uint64_t value) : m_value(value) {
   if(value >> kPageFieldBits != 0) {
      throw Error(ErrorCode::Overflow, "page field wider than 40 bits");
   }
}

BitString OsnmaPageField::bits() const {
   BitWriter w;
   w.write(m_value, kPageFieldBits);
   return w.take();
}

PageSplit split_page_field(OsnmaPageField field) {
   PageSplit out;
   out.hkroot = static_cast<uint8_t>(field.value() >> kMackBitsPerPage);
   out.mack = static_cast<uint32_t>(field.value() & low_mask(kMackBitsPerPage));
   return out;
}

OsnmaPageField join_page_field(PageSplit parts) {
   return OsnmaPageField((uint64_t{parts.hkroot} << kMackBitsPerPage) | parts.mack);
}

void SubframePayload::validate() const {
   if(hkroot.size() != kHkrootBits) {
      throw Error(ErrorCode::BadLength, "HKROOT section must be 120 bits, got " + std::to_string(hkroot.size()));
   }
   if(mack.size() != kMackBits) {
      throw Error(ErrorCode::BadLength, "MACK section must be 480 bits, got " + std::to_string(mack.size()));
   }
}

SubframePayload assemble_subframe(std::span<const OsnmaPageField> fields) {
   if(fields.size() != kPagesPerSubframe) {
      throw Error(ErrorCode::WrongPageCount, "expected 15 page fields, got " + std::to_string(fields.size()));
   }
   BitWriter hk;
   BitWriter mk;
   for(const auto& f : fields) {
      const PageSplit parts = split_page_field(f);
      hk.write(parts.hkroot, kHkrootBitsPerPage);
      mk.write(parts.mack, kMackBitsPerPage);
   }
   return SubframePayload{hk.take(), mk.take()};
}

SubframePages disassemble_subframe(const SubframePayload& payload) {
   payload.validate();
   SubframePages pages;
   for(unsigned p = 0; p < kPagesPerSubframe; ++p) {
      PageSplit parts;
      parts.hkroot = static_cast<uint8_t>(payload.hkroot.read_uint(p * kHkrootBitsPerPage, kHkrootBitsPerPage));
      parts.mack = static_cast<uint32_t>(payload.mack.read_uint(p * kMackBitsPerPage, kMackBitsPerPage));
      pages[p] = join_page_field(parts);
   }
   return pages;
}

std::vector<SubframePages> read_page_vectors(std::istream& in) {
   std::vector<SubframePages> out;
   std::vector<OsnmaPageField> current;
   auto flush = [&]() {
      if(current.empty()) {
         return;
      }
      if(current.size() != kPagesPerSubframe) {
         throw Error(ErrorCode::WrongPageCount,
                     "vector block with " + std::to_string(current.size()) + " page lines");
      }
      SubframePages block;
      std::copy(current.begin(), current.end(), block.begin());
      out.push_back(block);
      current.clear();
   };

   std::string line;
   while(std::getline(in, line)) {
      if(const auto hash = line.find('#'); hash != std::string::npos) {
         line.erase(hash);
      }
      std::string trimmed;
      for(char c : line) {
         if(!std::isspace(static_cast<unsigned char>(c)) && c != '_') {
            trimmed.push_back(c);
         }
      }
      if(trimmed.empty()) {
         flush();
         continue;
      }
      if(trimmed.size() != kPageFieldBits / 4) {
         throw Error(ErrorCode::BadHex, "page line must hold 10 hex digits: '" + line + "'");
      }
      current.emplace_back(BitString::from_hex(trimmed).read_uint(0, kPageFieldBits));
   }
   flush();
   return out;
}

void write_page_vectors(std::ostream& out, std::span<const SubframePages> subframes) {
   for(size_t i = 0; i < subframes.size(); ++i) {
      if(i > 0) {
         out << '\n';
      }
      for(const auto& f : subframes[i]) {
         out << f.bits().to_hex() << '\n';
      }
   }
}

}  // namespace osnma::bitgrid
