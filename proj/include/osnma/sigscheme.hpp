#pragma once

#include <osnma/crypto.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace osnma::sig {

enum class Family : uint8_t {
   EllipticCurve,
   Lattice,
   HashStateless,
   HashStateful,
   Hybrid,
};

std::string_view to_string(Family f);

struct SchemeCharacterization {
      std::string name;
      uint64_t pk_bits = 0;
      uint64_t sig_bits = 0;
      Family family = Family::EllipticCurve;
      bool quantum_resistant = false;
      /// Public-key size in its originally published notation, for rows
      /// whose printed values do not reconcile.
      std::string pk_printed;
      bool flagged = false;
      std::string note;
};

/// Frozen rows: two EC baselines, three stateless PQC schemes, two stateful hash schemes.
const std::vector<SchemeCharacterization>& builtin_characterizations();

/// Case-insensitive lookup, ignoring '-', '+', '_' and spaces. Throws UnknownScheme.
const SchemeCharacterization& characterize(std::string_view name);

/// Columns: name,pk_bits,sig_bits,family,quantum_resistant.
void export_csv(std::ostream& out);

struct KeyPair {
      Bytes private_key;
      Bytes public_key;
};

class SignatureScheme {
   public:
      virtual ~SignatureScheme() = default;

      virtual const SchemeCharacterization& characterization() const = 0;
      /// True when the provider only mimics the sizes of the named scheme.
      virtual bool surrogate() const = 0;

      /// Deterministic key generation from arbitrary seed bytes.
      virtual KeyPair keygen(std::span<const uint8_t> seed) const = 0;
      virtual Bytes sign(std::span<const uint8_t> private_key, std::span<const uint8_t> msg) const = 0;
      virtual bool verify(std::span<const uint8_t> public_key,
                          std::span<const uint8_t> msg,
                          std::span<const uint8_t> signature) const = 0;

      const std::string& name() const { return characterization().name; }
      uint64_t pk_bits() const { return characterization().pk_bits; }
      uint64_t sig_bits() const { return characterization().sig_bits; }
};

using ProviderPtr = std::shared_ptr<const SignatureScheme>;

/**
 * Provider for a scheme name. EC names give real ECDSA, lattice and
 * stateless hash names give the size-faithful surrogate, and
 * "hybrid(<classical>,<pqc>)" gives the concatenating composite.
 * Throws UnknownScheme, or NotSignable for stateful hash schemes.
 */
ProviderPtr make_provider(std::string_view name);
ProviderPtr make_hybrid(ProviderPtr classical, ProviderPtr pqc);

/// Raw ECDSA access, used by the deterministic-nonce test vectors.
namespace ecdsa {

enum class Curve : uint8_t {
   P256,
   P521,
};

/// RFC 6979 nonce for private key d (big-endian) and message hash h1.
Bytes rfc6979_nonce(Curve curve, std::span<const uint8_t> d, std::span<const uint8_t> h1);
/// r || s, each padded to the curve order length.
Bytes sign_digest(Curve curve, std::span<const uint8_t> d, std::span<const uint8_t> h1);
/// Compressed SEC1 point for private key d.
Bytes public_from_private(Curve curve, std::span<const uint8_t> d);

}  // namespace ecdsa

inline constexpr uint8_t kNpktEcdsaP256 = 1;
inline constexpr uint8_t kNpktEcdsaP521 = 3;
inline constexpr uint8_t kNpktSentinel = 4;

/// NPKT code to provider. Codes 1 and 3 are built in, 4 is assigned but not
/// modelled, and the remaining codes need an extension mapping.
class NpktRegistry {
   public:
      NpktRegistry();

      /// Throws ConfigInvalid for codes outside 0..15 or already assigned
      /// built-in codes; UnknownScheme or NotSignable for bad scheme names.
      void assign(uint8_t code, std::string_view scheme);

      /// Throws UnassignedNpkt.
      ProviderPtr lookup(uint8_t code) const;
      std::optional<uint8_t> code_for(std::string_view scheme) const;
      bool is_assigned(uint8_t code) const;

      /// Lines of the form `npkt=<code> scheme=<name>`; '#' starts a comment.
      static NpktRegistry from_config(std::istream& in);

   private:
      std::map<uint8_t, ProviderPtr> m_providers;
};

}  // namespace osnma::sig
