#include <osnma/error.hpp>

namespace osnma {

std::string_view to_string(ErrorCode code) {
   switch(code) {
      case ErrorCode::WrongPageCount:
         return "WrongPageCount";
      case ErrorCode::Overflow:
         return "Overflow";
      case ErrorCode::Underrun:
         return "Underrun";
      case ErrorCode::BadLength:
         return "BadLength";
      case ErrorCode::BadHex:
         return "BadHex";
      case ErrorCode::InvalidParams:
         return "InvalidParams";
      case ErrorCode::BadSeedLength:
         return "BadSeedLength";
      case ErrorCode::UnsupportedHash:
         return "UnsupportedHash";
      case ErrorCode::UnsupportedMacFunction:
         return "UnsupportedMacFunction";
      case ErrorCode::IndexOrder:
         return "IndexOrder";
      case ErrorCode::RootKeySigning:
         return "RootKeySigning";
      case ErrorCode::TooManyTags:
         return "TooManyTags";
      case ErrorCode::TooFewTags:
         return "TooFewTags";
      case ErrorCode::ChainExhausted:
         return "ChainExhausted";
      case ErrorCode::MalformedPadding:
         return "MalformedPadding";
      case ErrorCode::ReservedCode:
         return "ReservedCode";
      case ErrorCode::SignatureTooLarge:
         return "SignatureTooLarge";
      case ErrorCode::KeyTooLarge:
         return "KeyTooLarge";
      case ErrorCode::CapacityExceeded:
         return "CapacityExceeded";
      case ErrorCode::InvalidTransition:
         return "InvalidTransition";
      case ErrorCode::MalformedDsm:
         return "MalformedDsm";
      case ErrorCode::UnassignedNpkt:
         return "UnassignedNpkt";
      case ErrorCode::UnknownScheme:
         return "UnknownScheme";
      case ErrorCode::NotSignable:
         return "NotSignable";
      case ErrorCode::BadKey:
         return "BadKey";
      case ErrorCode::CryptoFailure:
         return "CryptoFailure";
      case ErrorCode::ConfigInvalid:
         return "ConfigInvalid";
   }
   return "Unknown";
}

}  // namespace osnma
