#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phr {

// Every failure the library reports. Callers switch on the code; the message
// is for humans.
enum class Errc {
  Length,              // byte string has the wrong size for its type
  Decode,              // bad tag, off-curve point, non-canonical encoding
  InvalidArgument,     // precondition violated by the caller
  PartialKeyInvalid,   // KGC-issued partial key fails its pairing check
  AuthFailure,         // DEM tag mismatch
  NotFound,            // store: unknown content id
  DigestMismatch,      // store: blob does not hash to its id
  DuplicateDataId,     // access list: data id already registered
  UnknownDataId,       // access list: data id never registered
  Stale,               // timestamp outside the freshness window
  Replay,              // nonce already seen
  CacheFull,           // nonce cache at capacity with nothing expired
  UnknownIdentity,     // DU public key not in the published registry
  Malformed,           // message decodes but its fields are inconsistent
  DecryptFail,         // sealed request could not be opened
  UnknownDestination,  // gateway has no such node
  UnknownFormat,       // report emitter format
  Io,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  explicit Error(Errc code) : Error(code, std::string(to_string(code))) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace phr
