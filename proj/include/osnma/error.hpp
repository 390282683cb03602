#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osnma {

enum class ErrorCode {
   // bitgrid
   WrongPageCount,
   Overflow,
   Underrun,
   BadLength,
   BadHex,
   // tesla
   InvalidParams,
   BadSeedLength,
   UnsupportedHash,
   UnsupportedMacFunction,
   IndexOrder,
   RootKeySigning,
   TooManyTags,
   TooFewTags,
   ChainExhausted,
   MalformedPadding,
   // dsm
   ReservedCode,
   SignatureTooLarge,
   KeyTooLarge,
   CapacityExceeded,
   InvalidTransition,
   MalformedDsm,
   // sigscheme
   UnassignedNpkt,
   UnknownScheme,
   NotSignable,
   BadKey,
   CryptoFailure,
   // sim / cli
   ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
   public:
      Error(ErrorCode code, const std::string& what) :
            std::runtime_error(std::string(to_string(code)) + ": " + what), m_code(code) {}

      ErrorCode code() const noexcept { return m_code; }

   private:
      ErrorCode m_code;
};

}  // namespace osnma
