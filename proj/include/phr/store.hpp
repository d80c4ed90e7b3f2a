#pragma once

// Content-addressed blob store (stand-in for a hospital's IPFS node) and the
// hospital-side access list that maps data identifiers to blob addresses.

#include <array>
#include <compare>
#include <filesystem>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "phr/bytes.hpp"
#include "phr/pairing.hpp"

namespace phr {

// SHA-256 of the blob bytes.
struct ContentId {
  static constexpr std::size_t kBytes = 32;
  std::array<std::uint8_t, kBytes> digest{};

  static ContentId of(ByteView blob);
  std::string hex() const;
  static ContentId from_hex(std::string_view hex);

  auto operator<=>(const ContentId&) const = default;
};

class BlobStore {
 public:
  virtual ~BlobStore() = default;

  // Idempotent: the same bytes always map to the same id.
  virtual ContentId put(ByteView blob) = 0;
  // Errc::NotFound for unknown ids; Errc::DigestMismatch when the stored
  // bytes no longer hash to `id`.
  virtual Bytes get(const ContentId& id) const = 0;
  virtual bool contains(const ContentId& id) const = 0;
};

class MemoryBlobStore final : public BlobStore {
 public:
  ContentId put(ByteView blob) override;
  Bytes get(const ContentId& id) const override;
  bool contains(const ContentId& id) const override;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mu_;
  std::map<ContentId, Bytes> blobs_;
};

// One file per blob, named by the lowercase hex digest. Writes go through a
// temporary file and a rename, so readers never see partial blobs.
class DirectoryBlobStore final : public BlobStore {
 public:
  explicit DirectoryBlobStore(std::filesystem::path dir);

  ContentId put(ByteView blob) override;
  Bytes get(const ContentId& id) const override;
  bool contains(const ContentId& id) const override;

  std::filesystem::path path_of(const ContentId& id) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct AccessListEntry {
  Bytes data_id;
  ContentId address;
  IdElem owner_pk;

  bool operator==(const AccessListEntry&) const = default;
};

// Hospital A's List_1. Single writer; lookups may run concurrently.
class AccessList {
 public:
  AccessList() = default;
  AccessList(AccessList&& other) noexcept;
  AccessList& operator=(AccessList&& other) noexcept;

  // Errc::DuplicateDataId if `data_id` is already registered.
  void register_access(ByteView data_id, const ContentId& address, const IdElem& owner_pk);
  // Errc::UnknownDataId if absent.
  AccessListEntry lookup_access(ByteView data_id) const;
  std::size_t size() const;
  std::vector<AccessListEntry> entries() const;

  // Line-delimited records: "<data_id hex> <digest hex> <owner pk hex>".
  void save(const std::filesystem::path& file) const;
  static AccessList load(const std::filesystem::path& file);

 private:
  mutable std::shared_mutex mu_;
  std::map<Bytes, AccessListEntry> entries_;
};

}  // namespace phr
