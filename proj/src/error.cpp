#include "phr/error.hpp"

namespace phr {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::Length: return "LengthError";
    case Errc::Decode: return "DecodeError";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::PartialKeyInvalid: return "PartialKeyInvalid";
    case Errc::AuthFailure: return "AuthFailure";
    case Errc::NotFound: return "NotFound";
    case Errc::DigestMismatch: return "DigestMismatch";
    case Errc::DuplicateDataId: return "DuplicateDataId";
    case Errc::UnknownDataId: return "UnknownDataId";
    case Errc::Stale: return "Stale";
    case Errc::Replay: return "Replay";
    case Errc::CacheFull: return "CacheFull";
    case Errc::UnknownIdentity: return "UnknownIdentity";
    case Errc::Malformed: return "Malformed";
    case Errc::DecryptFail: return "DecryptFail";
    case Errc::UnknownDestination: return "UnknownDestination";
    case Errc::UnknownFormat: return "UnknownFormat";
    case Errc::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace phr
